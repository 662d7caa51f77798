use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{orbit_segment, MetricSpaceDescriptor, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::matching::{match_segments, SolverConfig, SolverKind};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const DEFAULT_LIMIT_TOLERANCE: f64 = 0.01;

/// Strictly increasing list of orbit lengths at which `F_n` is sampled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Schedule(Vec<usize>);

impl Schedule {
    pub fn new(points: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSchedule("schedule is empty".into()));
        }
        if points[0] == 0 {
            return Err(Error::InvalidSchedule("schedule entries must be at least 1".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule(format!("schedule not strictly increasing at {} -> {}", w[0], w[1])));
        }
        Ok(Schedule(points))
    }

    /// `2^lo, 2^(lo+1), ..., 2^hi`.
    pub fn powers_of_two(lo: u32, hi: u32) -> Result<Self> {
        if lo > hi || hi >= usize::BITS {
            return Err(Error::InvalidSchedule(format!("bad exponent range {lo}..={hi}")));
        }
        Self::new((lo..=hi).map(|e| 1usize << e).collect())
    }

    /// A single evaluation length.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("schedule is nonempty")
    }

    /// Number of trailing entries making up the tail window.
    pub fn tail_len(&self, tail_fraction: f64) -> usize {
        tail_len(self.0.len(), tail_fraction)
    }

    /// First schedule point inside the tail window.
    pub fn tail_start(&self, tail_fraction: f64) -> usize {
        self.0[self.0.len() - self.tail_len(tail_fraction)]
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule((6..=12).map(|e| 1usize << e).collect())
    }
}

impl TryFrom<Vec<usize>> for Schedule {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Schedule::new(v)
    }
}

impl From<Schedule> for Vec<usize> {
    fn from(s: Schedule) -> Self {
        s.0
    }
}

fn tail_len(m: usize, tail_fraction: f64) -> usize {
    ((tail_fraction * m as f64).ceil() as usize).clamp(1, m.max(1))
}

pub(crate) fn check_tail_fraction(tail_fraction: f64) -> Result<()> {
    if tail_fraction > 0.0 && tail_fraction <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tail fraction {tail_fraction} outside (0, 1]")))
    }
}

/// Samples of `n -> F_n(x, y)` along a schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FSequence {
    pub schedule: Schedule,
    pub values: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    pub gap_bounds: Vec<f64>,
    /// Larger of the two orbits' per-point error bounds.
    pub orbit_error_bound: f64,
}

/// `F_n(x, y)` at every schedule point. Both orbits are generated once at the
/// largest length; each schedule point solves on the prefixes.
pub fn f_sequence(
    spec: &SystemSpec,
    x: &SpacePoint,
    y: &SpacePoint,
    schedule: &Schedule,
    solver: &SolverConfig,
) -> Result<FSequence> {
    for &n in schedule.points() {
        solver.resolve(&spec.space, n)?;
    }
    let ox = orbit_segment(spec, x, schedule.max(), 1)?;
    let oy = orbit_segment(spec, y, schedule.max(), 1)?;
    f_sequence_segments(&spec.space, &ox, &oy, schedule, solver)
}

/// [`f_sequence`] on orbits that are already available, each at least
/// `schedule.max()` long.
pub fn f_sequence_segments(
    space: &MetricSpaceDescriptor,
    ox: &OrbitSegment,
    oy: &OrbitSegment,
    schedule: &Schedule,
    solver: &SolverConfig,
) -> Result<FSequence> {
    let results = schedule
        .points()
        .par_iter()
        .map(|&n| match_segments(space, ox, oy, n, solver))
        .collect::<Result<Vec<_>>>()?;
    Ok(FSequence {
        schedule: schedule.clone(),
        values: results.iter().map(|r| r.mean_cost).collect(),
        solvers: results.iter().map(|r| r.solver).collect(),
        gap_bounds: results.iter().map(|r| r.gap_bound).collect(),
        orbit_error_bound: ox.error_bound.max(oy.error_bound),
    })
}

/// Tail-window estimate of `limsup` and `liminf` of a sampled sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub fbar_hat: f64,
    pub funder_hat: f64,
    pub tail_fraction: f64,
    pub tail_len: usize,
    pub spread: f64,
    pub tolerance: f64,
    pub converged: bool,
}

impl LimitEstimate {
    pub fn from_values(values: &[f64], tail_fraction: f64, tolerance: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSchedule("no values to estimate from".into()));
        }
        check_tail_fraction(tail_fraction)?;
        let k = tail_len(values.len(), tail_fraction);
        let tail = &values[values.len() - k..];
        let fbar_hat = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let funder_hat = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = fbar_hat - funder_hat;
        Ok(LimitEstimate {
            fbar_hat,
            funder_hat,
            tail_fraction,
            tail_len: k,
            spread,
            tolerance,
            converged: spread <= tolerance,
        })
    }
}

pub fn limit_estimate(seq: &FSequence, tail_fraction: f64, tolerance: f64) -> Result<LimitEstimate> {
    LimitEstimate::from_values(&seq.values, tail_fraction, tolerance)
}
