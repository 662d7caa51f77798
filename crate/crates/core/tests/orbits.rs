use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use orbdist_core::dynsys::{
    distance, iterate_point, orbit_segment, parse_point, step, MetricSpaceDescriptor, Real, SpacePoint, SystemSpec,
    Word,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frac(q: &BigRational) -> BigRational {
    q - q.floor()
}

fn to_f64(q: &BigRational) -> f64 {
    q.numer().to_f64().unwrap() / q.denom().to_f64().unwrap()
}

#[test]
fn doubling_matches_rational_arithmetic() {
    let spec = SystemSpec::doubling();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let den: i64 = rng.gen_range(3..10_000);
        let num: i64 = rng.gen_range(0..den);
        let x = SpacePoint::circle(Real::ratio(num, den));
        let n = 256;
        let orbit = orbit_segment(&spec, &x, n, 1).unwrap();
        let mut q = BigRational::new(BigInt::from(num), BigInt::from(den));
        for k in 0..n {
            q = frac(&(q * BigInt::from(2)));
            let d = (orbit.coordinates()[k] - to_f64(&q)).abs();
            assert!(d.min(1.0 - d) < 1e-15, "{num}/{den} at k={}", k + 1);
        }
    }
}

#[test]
fn doubling_random_dyadic_matches_exact_shift_of_bits() {
    let spec = SystemSpec::doubling();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let n = 200;
    let bits = orbdist_core::analysis::sample_bits(&spec, n);
    let x = spec.space.random_point(&mut rng, bits, 0);
    let q0 = x.real().unwrap().to_rational();
    let orbit = orbit_segment(&spec, &x, n, 1).unwrap();
    let mut q = q0;
    for k in 0..n {
        q = frac(&(q * BigInt::from(2)));
        let d = (orbit.coordinates()[k] - to_f64(&q)).abs();
        assert!(d.min(1.0 - d) < 1e-15);
    }
}

#[test]
fn map_arithmetic_examples() {
    let id = SystemSpec::identity();
    let o = orbit_segment(&id, &parse_point(&id.space, "0.7").unwrap(), 3, 1).unwrap();
    assert_eq!(o.coordinates(), &[0.7, 0.7, 0.7]);

    let s1 = SystemSpec::paper_s1();
    let o = orbit_segment(&s1, &parse_point(&s1.space, "0").unwrap(), 4, 1).unwrap();
    assert_eq!(o.coordinates(), &[0.5, 0.0, 0.5, 0.0]);

    let d = SystemSpec::doubling();
    let o = orbit_segment(&d, &parse_point(&d.space, "1/3").unwrap(), 3, 1).unwrap();
    for (c, e) in o.coordinates().iter().zip([2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]) {
        assert!((c - e).abs() < 1e-15);
    }
}

#[test]
fn golden_rotation_tracks_float_reference() {
    let spec = SystemSpec::golden_rotation();
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let o = orbit_segment(&spec, &parse_point(&spec.space, "0").unwrap(), 1000, 1).unwrap();
    for (k, c) in o.coordinates().iter().enumerate() {
        let e = ((k + 1) as f64 * alpha).fract();
        let d = (c - e).abs();
        assert!(d.min(1.0 - d) < 1e-12);
    }
}

#[test]
fn segments_agree_with_iterates_and_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for spec in [SystemSpec::doubling(), SystemSpec::paper_s1(), SystemSpec::golden_rotation(), SystemSpec::full_shift(2).unwrap()] {
        let n = 64;
        let x = spec.space.random_point(&mut rng, orbdist_core::analysis::sample_bits(&spec, 2 * n), 2 * n + 64);
        let long = orbit_segment(&spec, &x, 2 * n, 1).unwrap();
        for r in [0usize, 1, 7, 30] {
            let window = orbit_segment(&spec, &x, n, 1 + r).unwrap();
            for k in 0..n {
                let d = distance(&spec.space, &window.points[k], &long.points[k + r]).unwrap();
                assert!(d <= 2.0 * long.error_bound.max(window.error_bound) + 1e-30, "{} r={r} k={k}: {d}", spec.family.name());
            }
        }
        for k in [1usize, 5, 40] {
            let p = iterate_point(&spec, &x, k, n).unwrap();
            let d = distance(&spec.space, &p, &long.points[k - 1]).unwrap();
            assert!(d <= 2.0 * long.error_bound + 1e-30);
        }
    }
}

#[test]
fn single_steps_agree_with_segments_on_isometries() {
    let spec = SystemSpec::rotation("3/7".parse().unwrap());
    let mut p = parse_point(&spec.space, "0.1").unwrap();
    let o = orbit_segment(&spec, &p, 10, 1).unwrap();
    for k in 0..10 {
        p = step(&spec, &p).unwrap();
        assert!(distance(&spec.space, &p, &o.points[k]).unwrap() < 1e-30);
    }
}

#[test]
fn paper_s1_period_two_orbit() {
    let spec = SystemSpec::paper_s1();
    let half = parse_point(&spec.space, "1/2").unwrap();
    let o = orbit_segment(&spec, &half, 6, 1).unwrap();
    assert_eq!(o.coordinates(), &[0.0, 0.5, 0.0, 0.5, 0.0, 0.5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metric_axioms_on_every_space(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spaces = [
            MetricSpaceDescriptor::UnitInterval,
            MetricSpaceDescriptor::Circle,
            MetricSpaceDescriptor::Shift { alphabet: 3 },
        ];
        for space in &spaces {
            let pts: Vec<SpacePoint> = (0..3).map(|_| space.random_point(&mut rng, 96, 24)).collect();
            let d = |i: usize, j: usize| distance(space, &pts[i], &pts[j]).unwrap();
            for i in 0..3 {
                prop_assert_eq!(d(i, i), 0.0);
                for j in 0..3 {
                    prop_assert_eq!(d(i, j), d(j, i));
                    prop_assert!(d(i, j) <= space.diameter());
                    for k in 0..3 {
                        prop_assert!(d(i, k) <= d(i, j) + d(j, k) + 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn shift_step_drops_first_symbol(symbols in prop::collection::vec(0u8..2, 4..40)) {
        let spec = SystemSpec::full_shift(2).unwrap();
        let w = SpacePoint::Shift(Word::new(2, symbols.clone()));
        let next = step(&spec, &w).unwrap();
        prop_assert_eq!(next.word().unwrap().symbols(), &symbols[1..]);
    }
}
