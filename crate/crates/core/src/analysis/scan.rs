use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{neighbor, scan_grid, Theta};
use crate::dynsys::{orbit_segment, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::estimator::{aligned_gap, time_averages, Observable, Schedule, DEFAULT_TAIL_FRACTION};
use crate::matching::{match_segments, SolverConfig};

/// Base points plus, for each base and each `delta`, one neighbour at
/// distance exactly `delta` and one at a random distance in `[delta/2, delta)`.
struct PairLayout {
    points: Vec<SpacePoint>,
    bases: usize,
    /// `(base index, neighbour index, ladder index)`.
    pairs: Vec<(usize, usize, usize)>,
}

fn sorted_ladder(deltas: &[f64], diameter: f64) -> Result<Vec<f64>> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("delta ladder is empty".into()));
    }
    if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d <= diameter)) {
        return Err(Error::InvalidParameter(format!("delta {d} outside (0, {diameter}]")));
    }
    let mut v = deltas.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    Ok(v)
}

fn layout(spec: &SystemSpec, grid_size: usize, ladder: &[f64], horizon: usize, seed: u64) -> Result<PairLayout> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = scan_grid(spec, grid_size, horizon, &mut rng)?;
    let bases = points.len();
    let mut pairs = Vec::with_capacity(bases * ladder.len() * 2);
    for b in 0..bases {
        for (level, &delta) in ladder.iter().enumerate() {
            for theta in [Theta::One, Theta::Random] {
                let q = neighbor(spec, &points[b], delta, theta, horizon, &mut rng)?;
                points.push(q);
                pairs.push((b, points.len() - 1, level));
            }
        }
    }
    Ok(PairLayout { points, bases, pairs })
}

fn orbits(spec: &SystemSpec, points: &[SpacePoint], n: usize) -> Result<Vec<OrbitSegment>> {
    points.par_iter().map(|p| orbit_segment(spec, p, n, 1)).collect()
}

/// Modulus at each ladder level from per-pair values: the maximum over all
/// pairs generated at that `delta` or a smaller one.
fn nested_max(values: &[(usize, f64)], levels: usize) -> Vec<(f64, Option<usize>)> {
    let mut per_level = vec![(0.0f64, None); levels];
    for (i, &(level, v)) in values.iter().enumerate() {
        if per_level[level].1.is_none() || v > per_level[level].0 {
            per_level[level] = (v, Some(i));
        }
    }
    // ladder is decreasing, so smaller deltas come later
    for l in (0..levels.saturating_sub(1)).rev() {
        if per_level[l + 1].0 > per_level[l].0 {
            per_level[l] = per_level[l + 1];
        }
    }
    per_level
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WmeConfig {
    pub grid_size: usize,
    pub deltas: Vec<f64>,
    pub n: usize,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for WmeConfig {
    fn default() -> Self {
        WmeConfig { grid_size: 16, deltas: vec![0.1, 0.05, 0.01, 1e-3, 1e-4], n: 2048, solver: SolverConfig::default(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub delta: f64,
    pub modulus: f64,
    pub contrast_modulus: f64,
    pub pairs: usize,
    /// Pair attaining `modulus`.
    pub worst_pair: Option<(SpacePoint, SpacePoint)>,
    /// Pair attaining `contrast_modulus`.
    pub worst_contrast_pair: Option<(SpacePoint, SpacePoint)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquicontinuityScan {
    pub n: usize,
    pub grid: Vec<SpacePoint>,
    pub rows: Vec<ScanRow>,
}

/// Moduli of `delta -> sup F(x, y)` and `delta -> sup aligned gap` over
/// sampled pairs with `d(x, y) <= delta`. Each pair's value is the larger of
/// its values at `n/2` and `n`, a two-point estimate of the `limsup`.
pub fn wme_scan(spec: &SystemSpec, config: &WmeConfig) -> Result<EquicontinuityScan> {
    let ladder = sorted_ladder(&config.deltas, spec.diameter())?;
    if config.n < 2 {
        return Err(Error::InvalidParameter("scan length must be at least 2".into()));
    }
    let half = config.n / 2;
    let lay = layout(spec, config.grid_size, &ladder, config.n, config.seed)?;
    let segs = orbits(spec, &lay.points, config.n)?;
    let values = lay
        .pairs
        .par_iter()
        .map(|&(a, b, level)| {
            let f = match_segments(&spec.space, &segs[a], &segs[b], half, &config.solver)?
                .mean_cost
                .max(match_segments(&spec.space, &segs[a], &segs[b], config.n, &config.solver)?.mean_cost);
            let g = aligned_gap(spec, &segs[a], &segs[b], half).max(aligned_gap(spec, &segs[a], &segs[b], config.n));
            Ok(((level, f), (level, g)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (fs, gs): (Vec<_>, Vec<_>) = values.into_iter().unzip();
    let fmod = nested_max(&fs, ladder.len());
    let gmod = nested_max(&gs, ladder.len());
    let pair_of = |i: Option<usize>| {
        i.map(|i| {
            let (a, b, _) = lay.pairs[i];
            (lay.points[a].clone(), lay.points[b].clone())
        })
    };
    let rows = ladder
        .iter()
        .enumerate()
        .map(|(l, &delta)| ScanRow {
            delta,
            modulus: fmod[l].0,
            contrast_modulus: gmod[l].0,
            pairs: lay.pairs.iter().filter(|p| p.2 >= l).count(),
            worst_pair: pair_of(fmod[l].1),
            worst_contrast_pair: pair_of(gmod[l].1),
        })
        .collect();
    Ok(EquicontinuityScan { n: config.n, grid: lay.points[..lay.bases].to_vec(), rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaScanConfig {
    pub grid_size: usize,
    pub deltas: Vec<f64>,
    pub schedule: Schedule,
    pub seed: u64,
}

impl Default for TaScanConfig {
    fn default() -> Self {
        TaScanConfig { grid_size: 16, deltas: vec![0.1, 0.05, 0.01], schedule: Schedule::default(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaScanRow {
    pub delta: f64,
    pub modulus: f64,
    pub pairs: usize,
    pub worst_pair: Option<(SpacePoint, SpacePoint)>,
    pub worst_values: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaScan {
    pub observable: String,
    pub rows: Vec<TaScanRow>,
    /// Set when the modulus at the smallest `delta` stays above 0.1 and
    /// within 10% of its value at the largest, i.e. it does not shrink.
    pub discontinuous: bool,
}

/// Modulus of continuity of the estimated time average `f*` over sampled
/// pairs.
pub fn ta_continuity_scan(spec: &SystemSpec, observable: &Observable, config: &TaScanConfig) -> Result<TaScan> {
    let ladder = sorted_ladder(&config.deltas, spec.diameter())?;
    observable.validate(&spec.space)?;
    let horizon = config.schedule.max();
    let lay = layout(spec, config.grid_size, &ladder, horizon, config.seed)?;
    let fstar = lay
        .points
        .par_iter()
        .map(|p| {
            time_averages(spec, p, std::slice::from_ref(observable), &config.schedule, DEFAULT_TAIL_FRACTION)
                .map(|r| r[0].fstar_hat)
        })
        .collect::<Result<Vec<f64>>>()?;
    let diffs: Vec<(usize, f64)> = lay.pairs.iter().map(|&(a, b, l)| (l, (fstar[a] - fstar[b]).abs())).collect();
    let modulus = nested_max(&diffs, ladder.len());
    let rows: Vec<TaScanRow> = ladder
        .iter()
        .enumerate()
        .map(|(l, &delta)| {
            let which = modulus[l].1.map(|i| lay.pairs[i]);
            TaScanRow {
                delta,
                modulus: modulus[l].0,
                pairs: lay.pairs.iter().filter(|p| p.2 >= l).count(),
                worst_pair: which.map(|(a, b, _)| (lay.points[a].clone(), lay.points[b].clone())),
                worst_values: which.map(|(a, b, _)| (fstar[a], fstar[b])),
            }
        })
        .collect();
    let first = rows.first().map_or(0.0, |r| r.modulus);
    let last = rows.last().map_or(0.0, |r| r.modulus);
    Ok(TaScan { observable: observable.id(), discontinuous: last > 0.1 && last >= 0.9 * first, rows })
}
