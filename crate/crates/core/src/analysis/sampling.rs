use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::dynsys::{
    iterate_point, parse_point, required_precision, Fixed, MetricSpaceDescriptor, Real, SpacePoint, SystemSpec,
};
use crate::error::{Error, Result};

/// Random binary digits given to sampled points: as many as an orbit of
/// length `horizon` consumes, so expanding maps never run out of entropy.
pub fn sample_bits(spec: &SystemSpec, horizon: usize) -> u32 {
    required_precision(spec, horizon).min(u32::MAX as u64) as u32
}

/// Symbol window given to sampled shift points.
pub fn sample_window(horizon: usize) -> usize {
    horizon + 64
}

/// Distributions from which probe points are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sampler {
    /// Lebesgue measure on the interval or circle; uniform Bernoulli symbols
    /// on the shift.
    Lebesgue,
    /// Uniform mixture of point masses.
    Atoms { atoms: Vec<String> },
    /// A single point mass.
    PointMass { point: String },
    /// `T^k(base)` with `k` uniform in `[burn_in, burn_in + span)`: the
    /// empirical measure of a long orbit, standing in for the measure it
    /// generates.
    OrbitTail { base: String, burn_in: usize, span: usize },
}

impl Sampler {
    pub fn describe(&self) -> String {
        match self {
            Sampler::Lebesgue => "lebesgue".into(),
            Sampler::Atoms { atoms } => format!("atoms{{{}}}", atoms.join(",")),
            Sampler::PointMass { point } => format!("point-mass({point})"),
            Sampler::OrbitTail { base, burn_in, span } => {
                format!("orbit-tail({base}, k in [{burn_in}, {}))", burn_in + span)
            }
        }
    }

    /// Draw one point whose orbit can be followed for `horizon` steps.
    pub fn sample<R: RngCore + ?Sized>(&self, spec: &SystemSpec, rng: &mut R, horizon: usize) -> Result<SpacePoint> {
        match self {
            Sampler::Lebesgue => Ok(spec.space.random_point(rng, sample_bits(spec, horizon), sample_window(horizon))),
            Sampler::Atoms { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidParameter("atom sampler needs at least one atom".into()));
                }
                parse_point(&spec.space, &atoms[rng.gen_range(0..atoms.len())])
            }
            Sampler::PointMass { point } => parse_point(&spec.space, point),
            Sampler::OrbitTail { base, burn_in, span } => {
                if *span == 0 {
                    return Err(Error::InvalidParameter("orbit-tail span must be positive".into()));
                }
                let base = parse_point(&spec.space, base)?;
                let k = burn_in + rng.gen_range(0..*span);
                iterate_point(spec, &base, k, horizon)
            }
        }
    }
}

/// Base points for scans: the system's designated points followed by a
/// jittered regular grid `(i + u_i) / size`.
pub fn scan_grid<R: RngCore + ?Sized>(
    spec: &SystemSpec,
    size: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<SpacePoint>> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!("grid size {size} below 2")));
    }
    let mut out = spec.designated_points(horizon);
    let bits = sample_bits(spec, horizon);
    for i in 0..size {
        let p = match spec.space {
            MetricSpaceDescriptor::Shift { .. } => spec.space.random_point(rng, bits, sample_window(horizon)),
            _ => {
                let u = Fixed::random(rng, bits).to_rational();
                let v = (BigRational::from_integer(BigInt::from(i)) + u) / BigRational::from_integer(BigInt::from(size));
                let (f, _) = Fixed::from_rational(&v, bits)?;
                spec.space.point(Real::Dyadic(f))?
            }
        };
        out.push(p);
    }
    Ok(out)
}

/// A point at distance about `delta * theta` from `p`: on real spaces
/// `p + delta theta` (reflected to `p - delta theta` when it would leave the
/// interval); on the shift, `p` with one symbol changed at the first index
/// `j` with `2^-j <= delta theta`.
pub fn neighbor<R: RngCore + ?Sized>(
    spec: &SystemSpec,
    p: &SpacePoint,
    delta: f64,
    theta: Theta,
    horizon: usize,
    rng: &mut R,
) -> Result<SpacePoint> {
    let bits = sample_bits(spec, horizon);
    match p {
        SpacePoint::Shift(w) => {
            let scale = match theta {
                Theta::One => delta,
                Theta::Random => delta * rng.gen_range(0.5..1.0),
            };
            let j = (-scale.log2()).ceil().max(0.0) as usize;
            Ok(SpacePoint::Shift(w.flipped_at(j)))
        }
        SpacePoint::Interval(r) | SpacePoint::Circle(r) => {
            let d = Real::from_f64(delta)?.to_rational();
            let step = match theta {
                Theta::One => d,
                Theta::Random => {
                    // theta = (1 + u) / 2 with u uniform in [0, 1)
                    let u = Fixed::random(rng, bits).to_rational();
                    d * (BigRational::one() + u) / BigRational::from_integer(BigInt::from(2))
                }
            };
            let base = r.to_rational();
            let mut q = &base + &step;
            if matches!(p, SpacePoint::Interval(_)) {
                if q > BigRational::one() {
                    q = &base - &step;
                }
                if q < BigRational::zero() {
                    q = BigRational::zero();
                }
            } else {
                q = &q - q.floor();
            }
            let value = if matches!((r, theta), (Real::Rational(_), Theta::One)) {
                Real::Rational(q)
            } else {
                Real::Dyadic(Fixed::from_rational(&q, bits)?.0)
            };
            spec.space.point(value)
        }
    }
}

/// Relative placement of a scan neighbour inside its distance band.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theta {
    /// Exactly at distance `delta`.
    One,
    /// Uniform in `[delta / 2, delta)`.
    Random,
}
