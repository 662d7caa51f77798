use orbdist_core::analysis::sample_bits;
use orbdist_core::dynsys::{distance, SpacePoint, SystemSpec};
use orbdist_core::estimator::{mean_gap, property_check, property_check_with, shift_invariance_check};
use orbdist_core::matching::{f_n, f_n_detail, SolverConfig, SolverKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<SystemSpec> {
    vec![
        SystemSpec::identity(),
        SystemSpec::golden_rotation(),
        SystemSpec::doubling(),
        SystemSpec::paper_s1(),
        SystemSpec::full_shift(2).unwrap(),
    ]
}

fn random_points(spec: &SystemSpec, rng: &mut ChaCha8Rng, count: usize, horizon: usize) -> Vec<SpacePoint> {
    (0..count).map(|_| spec.space.random_point(rng, sample_bits(spec, horizon), horizon + 64)).collect()
}

#[test]
fn symmetry_and_triangle_on_random_triples() {
    let solver = SolverConfig::default();
    for spec in families() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let p = random_points(&spec, &mut rng, 3, 64);
            let report = property_check(&spec, &[p[0].clone(), p[1].clone(), p[2].clone()], 64, &solver).unwrap();
            assert!(report.holds(), "{}: {:?}", spec.family.name(), report.violations);
        }
    }
}

#[test]
fn asymmetric_corruption_is_named() {
    let spec = SystemSpec::golden_rotation();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let p = random_points(&spec, &mut rng, 3, 16);
    let pts = [p[0].clone(), p[1].clone(), p[2].clone()];
    let report = property_check_with(&spec, &pts, 16, &SolverConfig::default(), |i, j, c| {
        if (i, j) == (0, 1) {
            for e in c.entries_mut() {
                *e += 0.1;
            }
        }
    })
    .unwrap();
    assert!(!report.holds());
    assert!(report.violations.iter().any(|v| v.identity == "symmetry"));
}

#[test]
fn x_equals_y_gives_zero_and_identity_gives_distance() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for spec in families() {
        let p = random_points(&spec, &mut rng, 1, 128).remove(0);
        assert_eq!(f_n(&spec, &p, &p, 128, &cfg).unwrap(), 0.0);
    }
    let id = SystemSpec::identity();
    let p = random_points(&id, &mut rng, 2, 8);
    let d = distance(&id.space, &p[0], &p[1]).unwrap();
    assert!((f_n(&id, &p[0], &p[1], 50, &cfg).unwrap() - d).abs() < 1e-15);
}

#[test]
fn golden_rotation_pairs_are_close_at_4096() {
    let spec = SystemSpec::golden_rotation();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let cfg = SolverConfig::with_kind(SolverKind::Cyclic);
    for _ in 0..5 {
        let p = random_points(&spec, &mut rng, 2, 4096);
        let r = f_n_detail(&spec, &p[0], &p[1], 4096, &cfg).unwrap();
        assert!(r.mean_cost <= 0.01, "{}", r.mean_cost);
    }
}

#[test]
fn doubling_fixed_point_against_random_is_quarter() {
    // W1 between the point mass at 0 and Lebesgue on the circle is 1/4
    let spec = SystemSpec::doubling();
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let zero = spec.designated_points(4096).remove(0);
    let y = random_points(&spec, &mut rng, 1, 4096).remove(0);
    let v = f_n(&spec, &zero, &y, 4096, &SolverConfig::default()).unwrap();
    assert!((0.22..=0.28).contains(&v), "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn shift_bound_holds(seed in any::<u64>(), r in 0usize..=8, s in 0usize..=8, family in 0usize..5) {
        let spec = families().remove(family);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_points(&spec, &mut rng, 2, 256 + 16);
        let check = shift_invariance_check(&spec, &p[0], &p[1], r, s, 256, &SolverConfig::default()).unwrap();
        prop_assert!(check.verdict.holds(), "{:?}", check);
        prop_assert!(check.difference <= (r + s) as f64 * spec.diameter() / 256.0 + 1e-9);
    }

    #[test]
    fn permuted_never_exceeds_aligned(seed in any::<u64>(), family in 0usize..5, n in 1usize..200) {
        let spec = families().remove(family);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_points(&spec, &mut rng, 2, n);
        let f = f_n(&spec, &p[0], &p[1], n, &SolverConfig::default()).unwrap();
        let g = mean_gap(&spec, &p[0], &p[1], n).unwrap();
        prop_assert!(f <= g + 1e-12, "{} > {}", f, g);
        prop_assert!(f >= 0.0 && f <= spec.diameter());
    }
}
