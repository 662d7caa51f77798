//! Map families and their fixed-point step functions.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::fixed::Fixed;
use super::space::{MetricSpaceDescriptor, Real, SpacePoint};
use crate::error::{Error, Result};

/// A real parameter of a map family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    Rational(BigRational),
    /// `(sqrt(5) - 1) / 2`
    Golden,
}

impl Param {
    pub fn to_f64(&self) -> f64 {
        match self {
            Param::Rational(q) => Real::Rational(q.clone()).to_f64(),
            Param::Golden => (5f64.sqrt() - 1.0) / 2.0,
        }
    }

    fn to_fixed(&self, bits: u32) -> Result<(Fixed, bool)> {
        match self {
            Param::Rational(q) => Fixed::from_rational(q, bits),
            Param::Golden => Ok((Fixed::golden(bits), false)),
        }
    }
}

impl std::str::FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "golden" {
            return Ok(Param::Golden);
        }
        match s.parse::<Real>()? {
            Real::Rational(q) => Ok(Param::Rational(q)),
            Real::Dyadic(f) => Ok(Param::Rational(f.to_rational())),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Rational(q) => write!(f, "{q}"),
            Param::Golden => write!(f, "golden"),
        }
    }
}

impl Serialize for Param {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(t) => t,
            Raw::Number(v) => format!("{v}"),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Identity,
    Rotation { alpha: Param },
    Doubling,
    Tent { slope: Param },
    Logistic { r: Param },
    /// The piecewise-quadratic circle map with period-2 orbit `{0, 1/2}`.
    PaperS1,
    FullShift { alphabet: u8 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::Rotation { .. } => "rotation",
            Family::Doubling => "doubling",
            Family::Tent { .. } => "tent",
            Family::Logistic { .. } => "logistic",
            Family::PaperS1 => "paper-s1",
            Family::FullShift { .. } => "full-shift",
        }
    }

    pub fn default_space(&self) -> MetricSpaceDescriptor {
        match self {
            Family::Rotation { .. } | Family::Doubling | Family::PaperS1 => MetricSpaceDescriptor::Circle,
            Family::Identity | Family::Tent { .. } | Family::Logistic { .. } => MetricSpaceDescriptor::UnitInterval,
            Family::FullShift { alphabet } => MetricSpaceDescriptor::Shift { alphabet: *alphabet },
        }
    }

    /// Per-step Lipschitz constant with respect to the space metric.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Family::Identity | Family::Rotation { .. } => 1.0,
            Family::Doubling | Family::PaperS1 => 2.0,
            Family::Tent { slope } => slope.to_f64(),
            Family::Logistic { r } => r.to_f64(),
            // sigma is 2-Lipschitz, but shift orbits are exact
            Family::FullShift { .. } => 1.0,
        }
    }

    /// Worst-case rounding injected by one fixed-point step, in units of the
    /// last working bit.
    fn rounding_units(&self) -> f64 {
        match self {
            Family::Identity | Family::Doubling | Family::FullShift { .. } => 0.0,
            Family::Rotation { alpha } => match alpha {
                Param::Golden => 1.0,
                Param::Rational(_) => 0.5,
            },
            Family::Tent { .. } | Family::PaperS1 => 2.0,
            Family::Logistic { .. } => 6.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::Tent { slope } => {
                let s = slope.to_f64();
                if !(s > 0.0 && s <= 2.0) {
                    return Err(Error::InvalidParameter(format!("tent slope {slope} outside (0, 2]")));
                }
            }
            Family::Logistic { r } => {
                let v = r.to_f64();
                if !(v > 0.0 && v <= 4.0) {
                    return Err(Error::InvalidParameter(format!("logistic parameter {r} outside (0, 4]")));
                }
            }
            Family::FullShift { alphabet } if *alphabet < 2 => {
                return Err(Error::InvalidParameter(format!("alphabet size {alphabet} < 2")));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Working-precision policy for expanding families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub guard_bits: u32,
    /// Precision used by isometric and contracting families.
    pub default_bits: u32,
    /// Ceiling; orbits needing more bits fail with `PrecisionExhausted`.
    pub max_bits: u64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { guard_bits: 64, default_bits: 128, max_bits: 1 << 22 }
    }
}

/// A dynamical system `(X, T)` with its metric and precision policy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemSpec {
    pub family: Family,
    pub space: MetricSpaceDescriptor,
    pub precision: PrecisionPolicy,
}

impl SystemSpec {
    pub fn new(family: Family) -> Result<Self> {
        let space = family.default_space();
        Self::with_space(family, space)
    }

    pub fn with_space(family: Family, space: MetricSpaceDescriptor) -> Result<Self> {
        family.validate()?;
        let compatible = match (&family, &space) {
            (Family::FullShift { alphabet }, MetricSpaceDescriptor::Shift { alphabet: a }) => alphabet == a,
            (f, s) => f.default_space() == *s,
        };
        if !compatible {
            return Err(Error::IncompatibleFamily { family: family.name(), space: space.name() });
        }
        Ok(SystemSpec { family, space, precision: PrecisionPolicy::default() })
    }

    pub fn with_precision(mut self, precision: PrecisionPolicy) -> Self {
        self.precision = precision;
        self
    }

    pub fn identity() -> Self {
        Self::new(Family::Identity).expect("valid")
    }

    pub fn rotation(alpha: Param) -> Self {
        Self::new(Family::Rotation { alpha }).expect("valid")
    }

    pub fn golden_rotation() -> Self {
        Self::rotation(Param::Golden)
    }

    pub fn doubling() -> Self {
        Self::new(Family::Doubling).expect("valid")
    }

    pub fn paper_s1() -> Self {
        Self::new(Family::PaperS1).expect("valid")
    }

    pub fn full_shift(alphabet: u8) -> Result<Self> {
        Self::new(Family::FullShift { alphabet })
    }

    pub fn diameter(&self) -> f64 {
        self.space.diameter()
    }

    pub fn is_exact_symbolic(&self) -> bool {
        matches!(self.family, Family::FullShift { .. })
    }

    /// Distinguished points probed alongside random samples: fixed points,
    /// branch points and short periodic orbits. Symbol windows are sized for
    /// orbits up to `horizon`.
    pub fn designated_points(&self, horizon: usize) -> Vec<SpacePoint> {
        let pt = |num: i64, den: i64| self.space.point(Real::ratio(num, den)).expect("in range");
        match &self.family {
            Family::Identity => vec![pt(0, 1), pt(1, 1)],
            Family::Rotation { .. } => vec![pt(0, 1)],
            Family::Doubling => vec![pt(0, 1)],
            Family::Tent { .. } => vec![pt(0, 1), pt(1, 2)],
            Family::Logistic { r } => {
                let mut v = vec![pt(0, 1)];
                if let Param::Rational(q) = r {
                    if *q > BigRational::one() {
                        // nontrivial fixed point 1 - 1/r
                        v.push(SpacePoint::Interval(Real::Rational(BigRational::one() - q.recip())));
                    }
                }
                v
            }
            Family::PaperS1 => vec![pt(0, 1), pt(1, 2)],
            Family::FullShift { alphabet } => (0..*alphabet)
                .map(|s| SpacePoint::Shift(super::space::Word::new(*alphabet, vec![s; horizon + 64])))
                .collect(),
        }
    }
}

/// Bits of working precision that keep an orbit of length `n` within
/// `2^-64` of the diameter: `ceil(n log2 L) + guard` for expanding families
/// (plus a few bits absorbing per-step rounding), the default otherwise.
pub fn required_precision(spec: &SystemSpec, n: usize) -> u64 {
    let l = spec.family.lipschitz();
    let policy = &spec.precision;
    if l <= 1.0 || spec.is_exact_symbolic() {
        return policy.default_bits as u64;
    }
    let expansion = (n as f64 * l.log2()).ceil() as u64;
    let rho = spec.family.rounding_units();
    let absorb = if rho > 0.0 { (rho * l / (l - 1.0)).log2().ceil().max(0.0) as u64 + 1 } else { 0 };
    expansion + policy.guard_bits as u64 + absorb
}

/// Fixed-point constants for one working precision.
pub(crate) struct Stepper<'a> {
    family: &'a Family,
    bits: u32,
    one: BigUint,
    half: BigUint,
    mask: BigUint,
    param: Option<BigUint>,
    /// Per-step rounding bound as a log2 value.
    pub log2_rounding: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(family: &'a Family, bits: u32) -> Result<Self> {
        let one = BigUint::one() << bits;
        let param = match family {
            Family::Rotation { alpha } => Some(alpha.to_fixed(bits)?.0.frac()),
            Family::Tent { slope } => Some(slope.to_fixed(bits)?.0),
            Family::Logistic { r } => Some(r.to_fixed(bits)?.0),
            _ => None,
        };
        let exact_param = match family {
            Family::Rotation { alpha } => alpha.to_fixed(bits)?.1,
            _ => true,
        };
        let units = if exact_param && matches!(family, Family::Rotation { .. }) {
            0.0
        } else {
            family.rounding_units()
        };
        Ok(Stepper {
            family,
            bits,
            half: BigUint::one() << (bits - 1),
            mask: &one - 1u32,
            one,
            param: param.map(|p| p.mantissa().clone()),
            log2_rounding: if units > 0.0 { units.log2() - bits as f64 } else { f64::NEG_INFINITY },
        })
    }

    /// One application of `T` to a mantissa at the stepper's precision.
    pub fn step(&self, x: &BigUint) -> BigUint {
        let bits = self.bits;
        match self.family {
            Family::Identity | Family::FullShift { .. } => x.clone(),
            Family::Rotation { .. } => (x + self.param.as_ref().expect("alpha")) & &self.mask,
            Family::Doubling => (x << 1u32) & &self.mask,
            Family::Tent { .. } => {
                let m = if x <= &self.half { x.clone() } else { &self.one - x };
                (self.param.as_ref().expect("slope") * m) >> bits
            }
            Family::Logistic { .. } => {
                let x = x.min(&self.one);
                let p = (x * (&self.one - x)) >> bits;
                let out = (self.param.as_ref().expect("r") * p) >> bits;
                out.min(self.one.clone())
            }
            Family::PaperS1 => {
                if x < &self.half {
                    let w = &self.half - x;
                    let sq = (&w * &w) >> bits;
                    (&self.one - (sq << 1u32)) & &self.mask
                } else {
                    let w = &self.one - x;
                    let sq = (&w * &w) >> bits;
                    &self.half - (sq << 1u32)
                }
            }
        }
    }
}

/// Apply `T` once. Real points are evaluated at `max(default_bits, own bits)`.
pub fn step(spec: &SystemSpec, p: &SpacePoint) -> Result<SpacePoint> {
    spec.space.check(p)?;
    match p {
        SpacePoint::Shift(w) => Ok(SpacePoint::Shift(w.shifted(1)?)),
        SpacePoint::Interval(r) | SpacePoint::Circle(r) => {
            let bits = match r {
                Real::Dyadic(f) => f.bits().max(spec.precision.default_bits),
                Real::Rational(_) => spec.precision.default_bits,
            };
            let (x, _) = r.to_fixed(bits)?;
            let x = if matches!(p, SpacePoint::Circle(_)) { x.frac() } else { x };
            let stepper = Stepper::new(&spec.family, bits)?;
            let y = Real::Dyadic(Fixed::from_parts(stepper.step(x.mantissa()), bits));
            spec.space.point(y)
        }
    }
}

pub(crate) fn is_zero_log(v: f64) -> bool {
    v == f64::NEG_INFINITY
}

/// `log2(2^a + 2^b)` with `-inf` as zero.
pub(crate) fn log2_add(a: f64, b: f64) -> f64 {
    if is_zero_log(a) {
        return b;
    }
    if is_zero_log(b) {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + f64::exp2(lo - hi)).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(v: &str) -> SpacePoint {
        MetricSpaceDescriptor::Circle.point(v.parse().unwrap()).unwrap()
    }

    #[test]
    fn rotation_step() {
        let spec = SystemSpec::rotation("0.25".parse().unwrap());
        let y = step(&spec, &circle("0.1")).unwrap();
        assert!((y.coordinate() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn paper_s1_step_at_zero_and_half() {
        let spec = SystemSpec::paper_s1();
        assert_eq!(step(&spec, &circle("0")).unwrap().coordinate(), 0.5);
        assert_eq!(step(&spec, &circle("1/2")).unwrap().coordinate(), 0.0);
        // second branch at x = 3/4: 1/2 - 2 (1/4)^2 = 3/8
        assert_eq!(step(&spec, &circle("3/4")).unwrap().coordinate(), 0.375);
        // first branch at x = 1/4: 1 - 2 (1/4)^2 = 7/8
        assert_eq!(step(&spec, &circle("1/4")).unwrap().coordinate(), 0.875);
    }

    #[test]
    fn doubling_step() {
        let y = step(&SystemSpec::doubling(), &circle("0.3")).unwrap();
        assert!((y.coordinate() - 0.6).abs() < 1e-15);
        let y = step(&SystemSpec::doubling(), &circle("0.75")).unwrap();
        assert_eq!(y.coordinate(), 0.5);
    }

    #[test]
    fn tent_and_logistic_steps() {
        let tent = SystemSpec::new(Family::Tent { slope: "2".parse().unwrap() }).unwrap();
        let p = MetricSpaceDescriptor::UnitInterval.point(Real::ratio(1, 2)).unwrap();
        assert_eq!(step(&tent, &p).unwrap().coordinate(), 1.0);
        let logistic = SystemSpec::new(Family::Logistic { r: "4".parse().unwrap() }).unwrap();
        assert_eq!(step(&logistic, &p).unwrap().coordinate(), 1.0);
        let q = MetricSpaceDescriptor::UnitInterval.point(Real::ratio(1, 4)).unwrap();
        assert_eq!(step(&logistic, &q).unwrap().coordinate(), 0.75);
    }

    #[test]
    fn logistic_parameter_range() {
        for bad in ["0", "4.5", "-1"] {
            assert!(SystemSpec::new(Family::Logistic { r: bad.parse().unwrap() }).is_err());
        }
        assert!(SystemSpec::new(Family::Logistic { r: "4".parse().unwrap() }).is_ok());
    }

    #[test]
    fn incompatible_family_space() {
        let err = SystemSpec::with_space(Family::Doubling, MetricSpaceDescriptor::UnitInterval).unwrap_err();
        assert!(matches!(err, Error::IncompatibleFamily { .. }));
        let spec = SystemSpec::doubling();
        let p = MetricSpaceDescriptor::UnitInterval.point(Real::ratio(1, 2)).unwrap();
        assert!(matches!(step(&spec, &p), Err(Error::IncompatibleSpace { .. })));
    }

    #[test]
    fn precision_requirements() {
        assert_eq!(required_precision(&SystemSpec::doubling(), 1024), 1088);
        assert_eq!(required_precision(&SystemSpec::golden_rotation(), 1_000_000), 128);
        assert_eq!(required_precision(&SystemSpec::identity(), 1), 128);
        assert_eq!(required_precision(&SystemSpec::identity(), 1 << 30), 128);
        // rounding families carry a few absorbing bits on top of n + 64
        let s1 = required_precision(&SystemSpec::paper_s1(), 2048);
        assert!((2048 + 64..2048 + 64 + 8).contains(&s1));
    }

    #[test]
    fn log_sum() {
        assert!((log2_add(-10.0, -10.0) - (-9.0)).abs() < 1e-12);
        assert_eq!(log2_add(f64::NEG_INFINITY, -3.0), -3.0);
    }
}
