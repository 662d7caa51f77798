use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::Sampler;
use crate::dynsys::{orbit_segment, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::estimator::{
    f_sequence_segments, generic_probe_detail, limit_estimate, membership_from_estimate, GenericConfig, NfConfig,
    Status, TimeAverageReport, Verdict,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairOutcome {
    pub x: SpacePoint,
    pub y: SpacePoint,
    /// `F_n(x, y)` along the schedule.
    pub values: Vec<f64>,
    pub verdict: Verdict,
}

/// Orbits of `points`, each long enough for the schedule.
fn orbits(spec: &SystemSpec, points: &[SpacePoint], n: usize) -> Result<Vec<OrbitSegment>> {
    points.par_iter().map(|p| orbit_segment(spec, p, n, 1)).collect()
}

fn judge_pairs(
    spec: &SystemSpec,
    points: &[SpacePoint],
    segs: &[OrbitSegment],
    pairs: &[(usize, usize)],
    nf: &NfConfig,
) -> Result<Vec<PairOutcome>> {
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let seq = f_sequence_segments(&spec.space, &segs[a], &segs[b], &nf.schedule, &nf.solver)?;
            let est = limit_estimate(&seq, nf.tail_fraction, nf.limit_tolerance)?;
            let verdict = membership_from_estimate(est, nf.tolerance);
            Ok(PairOutcome { x: points[a].clone(), y: points[b].clone(), values: seq.values, verdict })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UniqueErgodicityConfig {
    pub num_pairs: usize,
    pub nf: NfConfig,
    pub seed: u64,
    /// Pair each designated point with a random point before drawing random
    /// pairs.
    pub designated: bool,
}

impl Default for UniqueErgodicityConfig {
    fn default() -> Self {
        UniqueErgodicityConfig { num_pairs: 20, nf: NfConfig::default(), seed: 0, designated: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniqueErgodicityReport {
    pub verdict: Verdict,
    pub pairs: Vec<PairOutcome>,
    /// Failing pair with the largest margin, re-runnable on its own.
    pub witness: Option<PairOutcome>,
}

/// Is every sampled pair in `N(F)`? Fails as soon as one pair provably is
/// not; holds only if all pairs hold.
pub fn unique_ergodicity_probe(spec: &SystemSpec, config: &UniqueErgodicityConfig) -> Result<UniqueErgodicityReport> {
    if config.num_pairs == 0 {
        return Err(Error::InvalidParameter("num_pairs must be at least 1".into()));
    }
    let horizon = config.nf.schedule.max();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(2 * config.num_pairs);
    if config.designated {
        for d in spec.designated_points(horizon).into_iter().take(config.num_pairs) {
            points.push(d);
            points.push(Sampler::Lebesgue.sample(spec, &mut rng, horizon)?);
        }
    }
    while points.len() < 2 * config.num_pairs {
        points.push(Sampler::Lebesgue.sample(spec, &mut rng, horizon)?);
    }
    let segs = orbits(spec, &points, horizon)?;
    let pairs: Vec<(usize, usize)> = (0..config.num_pairs).map(|i| (2 * i, 2 * i + 1)).collect();
    let outcomes = judge_pairs(spec, &points, &segs, &pairs, &config.nf)?;

    let witness = outcomes
        .iter()
        .filter(|o| o.verdict.fails())
        .max_by(|a, b| a.verdict.margin.total_cmp(&b.verdict.margin))
        .cloned();
    let verdict = if let Some(w) = &witness {
        Verdict::new(
            Status::Fails,
            w.verdict.margin,
            format!("pair ({}, {}) is outside N(F): {}", w.x, w.y, w.verdict.diagnostics),
        )
    } else if outcomes.iter().all(|o| o.verdict.holds()) {
        let margin = outcomes.iter().map(|o| o.verdict.margin).fold(f64::INFINITY, f64::min);
        Verdict::new(Status::Holds, margin, format!("all {} pairs in N(F)", outcomes.len()))
    } else {
        let blocking = outcomes
            .iter()
            .filter(|o| o.verdict.status == Status::Inconclusive)
            .map(|o| o.verdict.margin)
            .fold(0.0, f64::max);
        let count = outcomes.iter().filter(|o| o.verdict.status == Status::Inconclusive).count();
        Verdict::new(Status::Inconclusive, blocking, format!("{count} pairs inconclusive"))
    };
    Ok(UniqueErgodicityReport { verdict, pairs: outcomes, witness })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErgodicityConfig {
    pub sampler: Sampler,
    pub num_pairs: usize,
    pub nf: NfConfig,
    pub seed: u64,
}

impl Default for ErgodicityConfig {
    fn default() -> Self {
        ErgodicityConfig { sampler: Sampler::Lebesgue, num_pairs: 100, nf: NfConfig::default(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    /// Indices into the sampled points.
    pub members: Vec<usize>,
    pub mass: f64,
    pub representative: SpacePoint,
    /// Time averages of the representative over the genericity battery.
    pub fingerprint: Vec<(String, f64)>,
    pub candidate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureProbeReport {
    pub sampler: String,
    pub num_points: usize,
    pub pairs: Vec<PairOutcome>,
    pub nf_fraction: f64,
    pub fails_fraction: f64,
    pub abstention_rate: f64,
    /// Ergodicity probe: `nf_fraction >= 1 - 2 abstention_rate`.
    pub consistent: bool,
    /// Physical probe: genericity verdict per sampled point.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub generic: Vec<Status>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub clusters: Vec<Cluster>,
    pub notes: Vec<String>,
}

fn fractions(outcomes: &[PairOutcome]) -> (f64, f64, f64) {
    let total = outcomes.len().max(1) as f64;
    let count = |s: Status| outcomes.iter().filter(|o| o.verdict.status == s).count() as f64 / total;
    (count(Status::Holds), count(Status::Fails), count(Status::Inconclusive))
}

fn sampler_notes(sampler: &Sampler) -> Vec<String> {
    match sampler {
        Sampler::OrbitTail { .. } => {
            vec!["orbit-tail sampling approximates the measure generated by the base point".into()]
        }
        _ => Vec::new(),
    }
}

/// Estimate `(mu x mu)(N(F))` from independent pairs drawn from `mu`.
pub fn ergodicity_probe(spec: &SystemSpec, config: &ErgodicityConfig) -> Result<MeasureProbeReport> {
    if config.num_pairs == 0 {
        return Err(Error::InvalidParameter("num_pairs must be at least 1".into()));
    }
    let horizon = config.nf.schedule.max();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points = (0..2 * config.num_pairs)
        .map(|_| config.sampler.sample(spec, &mut rng, horizon))
        .collect::<Result<Vec<_>>>()?;
    let segs = orbits(spec, &points, horizon)?;
    let pairs: Vec<(usize, usize)> = (0..config.num_pairs).map(|i| (2 * i, 2 * i + 1)).collect();
    let outcomes = judge_pairs(spec, &points, &segs, &pairs, &config.nf)?;
    let (nf_fraction, fails_fraction, abstention_rate) = fractions(&outcomes);
    Ok(MeasureProbeReport {
        sampler: config.sampler.describe(),
        num_points: points.len(),
        pairs: outcomes,
        nf_fraction,
        fails_fraction,
        abstention_rate,
        consistent: nf_fraction >= 1.0 - 2.0 * abstention_rate,
        generic: Vec::new(),
        clusters: Vec::new(),
        notes: sampler_notes(&config.sampler),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalConfig {
    pub sampler: Sampler,
    pub num_points: usize,
    pub nf: NfConfig,
    pub generic: GenericConfig,
    pub mass_threshold: f64,
    pub seed: u64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        PhysicalConfig {
            sampler: Sampler::Lebesgue,
            num_points: 40,
            nf: NfConfig::default(),
            generic: GenericConfig::default(),
            mass_threshold: 0.05,
            seed: 0,
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Group generic sample points by pairwise `F`-closeness (single linkage)
/// and report clusters whose sampled mass reaches the threshold.
pub fn physical_probe(spec: &SystemSpec, config: &PhysicalConfig) -> Result<MeasureProbeReport> {
    if config.num_points < 2 {
        return Err(Error::InvalidParameter("physical probe needs at least 2 points".into()));
    }
    if !(config.mass_threshold > 0.0 && config.mass_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("mass threshold {} outside (0, 1)", config.mass_threshold)));
    }
    let horizon = config.nf.schedule.max().max(config.generic.schedule.max());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points = (0..config.num_points)
        .map(|_| config.sampler.sample(spec, &mut rng, horizon))
        .collect::<Result<Vec<_>>>()?;
    let generic = points
        .par_iter()
        .map(|p| generic_probe_detail(spec, p, &config.generic))
        .collect::<Result<Vec<_>>>()?;
    let members: Vec<usize> = (0..points.len()).filter(|&i| generic[i].verdict.holds()).collect();
    let segs = orbits(spec, &points, config.nf.schedule.max())?;
    let pairs: Vec<(usize, usize)> = members
        .iter()
        .enumerate()
        .flat_map(|(k, &a)| members[k + 1..].iter().map(move |&b| (a, b)))
        .collect();
    let outcomes = judge_pairs(spec, &points, &segs, &pairs, &config.nf)?;

    let mut uf = UnionFind((0..points.len()).collect());
    for (o, &(a, b)) in outcomes.iter().zip(&pairs) {
        if o.verdict.holds() {
            uf.union(a, b);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; points.len()];
    for &i in &members {
        let r = uf.find(i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|m| {
            let rep = m[0];
            let mass = m.len() as f64 / points.len() as f64;
            Cluster {
                representative: points[rep].clone(),
                fingerprint: fingerprint(&generic[rep].averages),
                candidate: mass >= config.mass_threshold,
                mass,
                members: m,
            }
        })
        .collect();
    clusters.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.members[0].cmp(&b.members[0])));

    let (nf_fraction, fails_fraction, abstention_rate) = fractions(&outcomes);
    let mut notes = sampler_notes(&config.sampler);
    notes.push(format!(
        "candidate threshold {}: positive basin mass cannot be certified from finitely many samples",
        config.mass_threshold
    ));
    Ok(MeasureProbeReport {
        sampler: config.sampler.describe(),
        num_points: points.len(),
        pairs: outcomes,
        nf_fraction,
        fails_fraction,
        abstention_rate,
        consistent: nf_fraction >= 1.0 - 2.0 * abstention_rate,
        generic: generic.iter().map(|g| g.verdict.status).collect(),
        clusters,
        notes,
    })
}

fn fingerprint(averages: &[TimeAverageReport]) -> Vec<(String, f64)> {
    averages.iter().map(|r| (r.observable.clone(), r.fstar_hat)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Schedule;

    fn short_nf() -> NfConfig {
        NfConfig { schedule: Schedule::powers_of_two(2, 6).unwrap(), ..Default::default() }
    }

    #[test]
    fn identity_fails_unique_ergodicity() {
        let cfg = UniqueErgodicityConfig { num_pairs: 4, nf: short_nf(), seed: 1, designated: true };
        let r = unique_ergodicity_probe(&SystemSpec::identity(), &cfg).unwrap();
        assert_eq!(r.verdict.status, Status::Fails);
        let w = r.witness.unwrap();
        assert!(w.verdict.fails());
        assert_eq!(r.pairs.len(), 4);
    }

    #[test]
    fn point_mass_pairs_all_hold() {
        let cfg = ErgodicityConfig {
            sampler: Sampler::PointMass { point: "0.3".into() },
            num_pairs: 5,
            nf: short_nf(),
            seed: 0,
        };
        let r = ergodicity_probe(&SystemSpec::identity(), &cfg).unwrap();
        assert_eq!(r.nf_fraction, 1.0);
        assert!(r.consistent);
    }

    #[test]
    fn union_find_links_chains() {
        let mut uf = UnionFind((0..5).collect());
        uf.union(3, 4);
        uf.union(1, 3);
        assert_eq!(uf.find(4), 1);
        assert_ne!(uf.find(0), uf.find(4));
    }

    #[test]
    fn physical_probe_identity_has_no_mass() {
        let cfg = PhysicalConfig {
            num_points: 12,
            nf: NfConfig { tolerance: 1e-4, ..short_nf() },
            generic: GenericConfig { schedule: Schedule::powers_of_two(2, 6).unwrap(), ..Default::default() },
            mass_threshold: 0.1,
            seed: 5,
            ..Default::default()
        };
        let r = physical_probe(&SystemSpec::identity(), &cfg).unwrap();
        assert!(r.clusters.iter().all(|c| !c.candidate));
        assert_eq!(r.clusters.len(), 12);
    }
}
