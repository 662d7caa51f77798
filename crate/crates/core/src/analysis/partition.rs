use serde::{Deserialize, Serialize};

use crate::dynsys::{orbit_segment, MetricSpaceDescriptor, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::estimator::{f_sequence_segments, LimitEstimate, Schedule, DEFAULT_LIMIT_TOLERANCE, DEFAULT_TAIL_FRACTION};
use crate::matching::SolverConfig;

/// Regular bins of width at most `epsilon` with the common occupancy of two
/// orbit segments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionCover {
    pub epsilon: f64,
    pub width: f64,
    /// Orbit length the frequencies refer to.
    pub n: usize,
    pub freq_x: Vec<f64>,
    pub freq_y: Vec<f64>,
    /// `a_s = min(freq_x[s], freq_y[s])`.
    pub a: Vec<f64>,
    pub covered_mass: f64,
}

impl PartitionCover {
    pub fn cells(&self) -> usize {
        self.a.len()
    }

    /// `[lo, hi)` of cell `s` (the last interval cell also contains 1).
    pub fn cell(&self, s: usize) -> (f64, f64) {
        (s as f64 * self.width, ((s + 1) as f64 * self.width).min(1.0))
    }

    /// Cellwise minimum of the common occupancies of two covers on the same
    /// bins: frequencies both orbits keep at every length involved.
    pub fn meet(&self, other: &PartitionCover) -> PartitionCover {
        let a: Vec<f64> = self.a.iter().zip(&other.a).map(|(p, q)| p.min(*q)).collect();
        PartitionCover {
            epsilon: self.epsilon,
            width: self.width,
            n: self.n.max(other.n),
            freq_x: self.freq_x.iter().zip(&other.freq_x).map(|(p, q)| p.min(*q)).collect(),
            freq_y: self.freq_y.iter().zip(&other.freq_y).map(|(p, q)| p.min(*q)).collect(),
            covered_mass: a.iter().sum(),
            a,
        }
    }
}

fn frequencies(coords: &[f64], cells: usize) -> Vec<f64> {
    let mut counts = vec![0usize; cells];
    for &c in coords {
        let s = ((c * cells as f64).floor() as usize).min(cells - 1);
        counts[s] += 1;
    }
    counts.iter().map(|&k| k as f64 / coords.len() as f64).collect()
}

/// Bin the first `n` points of two orbits into `ceil(1 / epsilon)` equal cells.
pub fn partition_cover(
    space: &MetricSpaceDescriptor,
    orbit_x: &OrbitSegment,
    orbit_y: &OrbitSegment,
    n: usize,
    epsilon: f64,
) -> Result<PartitionCover> {
    if !space.is_one_dimensional() {
        return Err(Error::InvalidParameter(format!("no canonical binning on {}", space.name())));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
    }
    if n == 0 || orbit_x.len() < n || orbit_y.len() < n {
        return Err(Error::LengthMismatch { left: orbit_x.len().min(orbit_y.len()), right: n });
    }
    let cells = (1.0 / epsilon).ceil().max(1.0) as usize;
    let freq_x = frequencies(&orbit_x.coordinates()[..n], cells);
    let freq_y = frequencies(&orbit_y.coordinates()[..n], cells);
    let a: Vec<f64> = freq_x.iter().zip(&freq_y).map(|(p, q)| p.min(*q)).collect();
    Ok(PartitionCover {
        epsilon,
        width: 1.0 / cells as f64,
        n,
        freq_x,
        freq_y,
        covered_mass: a.iter().sum(),
        a,
    })
}

/// `epsilon sum a_s + M (1 - sum a_s)`.
pub fn prop34_bound(cover: &PartitionCover, diameter: f64) -> f64 {
    let mass = cover.covered_mass.clamp(0.0, 1.0);
    cover.epsilon * mass + diameter * (1.0 - mass)
}

/// Which limit the partition bound is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    /// Frequencies kept at every tail length bound the tail maximum of `F_n`.
    Upper,
    /// Frequencies along the best tail length bound the tail minimum.
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionConfig {
    pub schedule: Schedule,
    pub tail_fraction: f64,
    pub solver: SolverConfig,
    pub variant: BoundVariant,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            schedule: Schedule::default(),
            tail_fraction: DEFAULT_TAIL_FRACTION,
            solver: SolverConfig::default(),
            variant: BoundVariant::Upper,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionRow {
    pub n: usize,
    pub f_n: f64,
    pub covered_mass: f64,
    /// Bound from the occupancy at this `n` alone; holds for `F_n` itself.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    pub epsilon: f64,
    pub variant: BoundVariant,
    pub rows: Vec<PartitionRow>,
    pub estimate: LimitEstimate,
    /// Covered mass of the cover the limit bound is built from.
    pub covered_mass: f64,
    pub bound: f64,
    /// Allowance for solver gaps and orbit rounding.
    pub slack: f64,
    pub holds: bool,
}

/// Check the partition upper bound on `F` for one pair. For
/// [`BoundVariant::Upper`] the tail maximum of `F_n` is compared with the
/// bound built from the cellwise minimum occupancy over the tail; for
/// [`BoundVariant::Lower`] the tail minimum is compared with the best single
/// tail length. Each tail `F_n` is also checked against its own bound.
pub fn prop34_check(
    spec: &SystemSpec,
    x: &SpacePoint,
    y: &SpacePoint,
    epsilon: f64,
    config: &PartitionConfig,
) -> Result<PartitionReport> {
    let n_max = config.schedule.max();
    let ox = orbit_segment(spec, x, n_max, 1)?;
    let oy = orbit_segment(spec, y, n_max, 1)?;
    let seq = f_sequence_segments(&spec.space, &ox, &oy, &config.schedule, &config.solver)?;
    let estimate = LimitEstimate::from_values(&seq.values, config.tail_fraction, DEFAULT_LIMIT_TOLERANCE)?;
    let m = spec.diameter();
    let slack = 1e-6 + 10.0 * seq.orbit_error_bound + seq.gap_bounds.iter().copied().fold(0.0, f64::max);

    let first_tail = seq.values.len() - estimate.tail_len;
    let mut covers = Vec::with_capacity(estimate.tail_len);
    let mut rows = Vec::with_capacity(estimate.tail_len);
    let mut pointwise_ok = true;
    for (i, &n) in config.schedule.points().iter().enumerate().skip(first_tail) {
        let cover = partition_cover(&spec.space, &ox, &oy, n, epsilon)?;
        let bound = prop34_bound(&cover, m);
        pointwise_ok &= seq.values[i] <= bound + slack;
        rows.push(PartitionRow { n, f_n: seq.values[i], covered_mass: cover.covered_mass, bound });
        covers.push(cover);
    }
    let (cover, target) = match config.variant {
        BoundVariant::Upper => {
            let meet = covers[1..].iter().fold(covers[0].clone(), |acc, c| acc.meet(c));
            (meet, estimate.fbar_hat)
        }
        BoundVariant::Lower => {
            let best = covers
                .iter()
                .max_by(|a, b| a.covered_mass.total_cmp(&b.covered_mass))
                .expect("tail is nonempty")
                .clone();
            (best, estimate.funder_hat)
        }
    };
    let bound = prop34_bound(&cover, m);
    Ok(PartitionReport {
        epsilon,
        variant: config.variant,
        rows,
        estimate,
        covered_mass: cover.covered_mass,
        bound,
        slack,
        holds: pointwise_ok && target <= bound + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::Real;

    fn seg(spec: &SystemSpec, x: SpacePoint, n: usize) -> OrbitSegment {
        orbit_segment(spec, &x, n, 1).unwrap()
    }

    #[test]
    fn bound_arithmetic() {
        let mut c = PartitionCover {
            epsilon: 0.1,
            width: 0.1,
            n: 1,
            freq_x: vec![],
            freq_y: vec![],
            a: vec![],
            covered_mass: 0.9,
        };
        assert!((prop34_bound(&c, 1.0) - 0.19).abs() < 1e-15);
        c.covered_mass = 1.0;
        assert_eq!(prop34_bound(&c, 1.0), 0.1);
        c.covered_mass = 0.0;
        assert_eq!(prop34_bound(&c, 1.0), 1.0);
    }

    #[test]
    fn constant_orbits_share_one_cell() {
        let spec = SystemSpec::identity();
        let o = seg(&spec, SpacePoint::interval(Real::ratio(3, 10)), 5);
        let c = partition_cover(&spec.space, &o, &o, 5, 0.1).unwrap();
        assert_eq!(c.a.iter().filter(|&&a| a > 0.0).count(), 1);
        assert_eq!(c.covered_mass, 1.0);
    }

    #[test]
    fn uniform_against_constant() {
        // x under rotation by 1/10 visits every bin once per 10 steps
        let rot = SystemSpec::rotation("1/10".parse().unwrap());
        let ox = seg(&rot, SpacePoint::circle(Real::ratio(1, 20)), 10);
        let still = SystemSpec::rotation("0".parse().unwrap());
        let oy = seg(&still, SpacePoint::circle(Real::ratio(1, 20)), 10);
        let c = partition_cover(&MetricSpaceDescriptor::Circle, &ox, &oy, 10, 0.1).unwrap();
        let positive: Vec<f64> = c.a.iter().copied().filter(|&a| a > 0.0).collect();
        assert_eq!(positive.len(), 1);
        assert!((positive[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn shift_rejected() {
        let spec = SystemSpec::full_shift(2).unwrap();
        let w = SpacePoint::Shift(crate::dynsys::Word::new(2, vec![0; 8]));
        let o = seg(&spec, w, 4);
        assert!(partition_cover(&spec.space, &o, &o, 4, 0.1).is_err());
    }
}
