//! Precision-tracked orbit segments.

use serde::Serialize;

use super::fixed::Fixed;
use super::space::{distance, MetricSpaceDescriptor, Real, SpacePoint};
use super::system::{log2_add, required_precision, Stepper, SystemSpec};
use crate::error::{Error, Result};

/// Binary digits kept for each stored orbit point.
pub const STORE_BITS: u32 = 128;

/// Extra working bits on top of `required_precision`, absorbing the storage
/// rounding so the total error stays within `2^-64` of the diameter.
const STORAGE_GUARD: u32 = 2;

/// The points `T^k x` for `k = start_index, ..., start_index + n - 1`.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitSegment {
    pub base: SpacePoint,
    pub start_index: usize,
    pub points: Vec<SpacePoint>,
    pub precision_bits: u64,
    /// Certified bound on the metric distance between each stored point and
    /// the true iterate.
    pub error_bound: f64,
    #[serde(skip)]
    coords: Vec<f64>,
}

impl OrbitSegment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Real embedding of every point (see [`SpacePoint::coordinate`]).
    pub fn coordinates(&self) -> &[f64] {
        &self.coords
    }

    /// The first `n` points as a shorter segment.
    pub fn prefix(&self, n: usize) -> OrbitSegment {
        let n = n.min(self.points.len());
        OrbitSegment {
            base: self.base.clone(),
            start_index: self.start_index,
            points: self.points[..n].to_vec(),
            precision_bits: self.precision_bits,
            error_bound: self.error_bound,
            coords: self.coords[..n].to_vec(),
        }
    }
}

/// Orbit of `x` of length `n` starting at iterate `start_index` (default 1).
pub fn orbit_segment(spec: &SystemSpec, x: &SpacePoint, n: usize, start_index: usize) -> Result<OrbitSegment> {
    if n == 0 {
        return Err(Error::EmptyOrbit);
    }
    if start_index == 0 {
        return Err(Error::InvalidParameter("start index must be at least 1".into()));
    }
    spec.space.check(x)?;
    let horizon = start_index + n - 1;
    match x {
        SpacePoint::Shift(w) => {
            let available = w.window_len();
            if available <= horizon {
                return Err(Error::WindowTooShort { available, horizon });
            }
            let points = (start_index..=horizon)
                .map(|k| w.shifted(k).map(SpacePoint::Shift))
                .collect::<Result<Vec<_>>>()?;
            let coords = points.iter().map(SpacePoint::coordinate).collect();
            Ok(OrbitSegment {
                base: x.clone(),
                start_index,
                points,
                precision_bits: 0,
                error_bound: f64::powi(0.5, (available - horizon).min(1074) as i32),
                coords,
            })
        }
        SpacePoint::Interval(r) | SpacePoint::Circle(r) => {
            let circle = matches!(spec.space, MetricSpaceDescriptor::Circle);
            let required = required_precision(spec, horizon) + STORAGE_GUARD as u64;
            if required > spec.precision.max_bits {
                return Err(Error::PrecisionExhausted { required, ceiling: spec.precision.max_bits });
            }
            let bits = required as u32;
            let (start, exact) = r.to_fixed(bits)?;
            let start = if circle { start.frac() } else { start };
            let stepper = Stepper::new(&spec.family, bits)?;
            let log2_lip = spec.family.lipschitz().log2();

            let mut log_err = if exact { f64::NEG_INFINITY } else { -(bits as f64) - 1.0 };
            let mut worst = f64::NEG_INFINITY;
            let mut current = start.mantissa().clone();
            let mut points = Vec::with_capacity(n);
            for k in 1..=horizon {
                current = stepper.step(&current);
                log_err = log2_add(log_err + log2_lip, stepper.log2_rounding);
                if k >= start_index {
                    worst = worst.max(log_err);
                    let (stored, _) = Fixed::from_parts(current.clone(), bits).with_bits(STORE_BITS);
                    let stored = if circle { stored.frac() } else { stored };
                    points.push(spec.space.point(Real::Dyadic(stored))?);
                }
            }
            // slack for the f64 bookkeeping itself
            let arithmetic = if worst == f64::NEG_INFINITY { 0.0 } else { f64::exp2(worst + 1e-9) };
            let error_bound = arithmetic + f64::exp2(-(STORE_BITS as f64) - 1.0);
            let coords = points.iter().map(SpacePoint::coordinate).collect();
            Ok(OrbitSegment {
                base: x.clone(),
                start_index,
                points,
                precision_bits: required,
                error_bound,
                coords,
            })
        }
    }
}

/// The iterate `T^k x` carried at full working precision, for use as the
/// base of a further orbit of length `horizon`.
pub fn iterate_point(spec: &SystemSpec, x: &SpacePoint, k: usize, horizon: usize) -> Result<SpacePoint> {
    spec.space.check(x)?;
    if k == 0 {
        return Ok(x.clone());
    }
    match x {
        SpacePoint::Shift(w) => Ok(SpacePoint::Shift(w.shifted(k)?)),
        SpacePoint::Interval(r) | SpacePoint::Circle(r) => {
            let required = required_precision(spec, k + horizon) + STORAGE_GUARD as u64;
            if required > spec.precision.max_bits {
                return Err(Error::PrecisionExhausted { required, ceiling: spec.precision.max_bits });
            }
            let bits = required as u32;
            let (start, _) = r.to_fixed(bits)?;
            let start = if matches!(x, SpacePoint::Circle(_)) { start.frac() } else { start };
            let stepper = Stepper::new(&spec.family, bits)?;
            let mut current = start.mantissa().clone();
            for _ in 0..k {
                current = stepper.step(&current);
            }
            spec.space.point(Real::Dyadic(Fixed::from_parts(current, bits)))
        }
    }
}

/// Distance between the `i`-th and `j`-th points of two segments.
pub fn segment_distance(space: &MetricSpaceDescriptor, a: &OrbitSegment, i: usize, b: &OrbitSegment, j: usize) -> f64 {
    distance(space, &a.points[i], &b.points[j]).expect("segments share the space")
}
