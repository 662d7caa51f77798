//! Metric spaces and their points.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::fixed::Fixed;
use crate::error::{Error, Result};

/// Symbols used for the shift-space coordinate embedding.
const COORDINATE_DEPTH: usize = 53;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricSpaceDescriptor {
    /// `[0, 1]` with `|p - q|`.
    UnitInterval,
    /// `R/Z` with the arc distance.
    Circle,
    /// One-sided full shift over `alphabet` symbols, `d = 2^-j` at the first
    /// differing index `j`.
    Shift { alphabet: u8 },
}

impl MetricSpaceDescriptor {
    pub fn diameter(&self) -> f64 {
        match self {
            MetricSpaceDescriptor::UnitInterval => 1.0,
            MetricSpaceDescriptor::Circle => 0.5,
            MetricSpaceDescriptor::Shift { .. } => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricSpaceDescriptor::UnitInterval => "unit-interval",
            MetricSpaceDescriptor::Circle => "circle",
            MetricSpaceDescriptor::Shift { .. } => "shift-space",
        }
    }

    pub fn is_one_dimensional(&self) -> bool {
        !matches!(self, MetricSpaceDescriptor::Shift { .. })
    }

    /// Check that `p` is a point of this space.
    pub fn check(&self, p: &SpacePoint) -> Result<()> {
        let ok = match (self, p) {
            (MetricSpaceDescriptor::UnitInterval, SpacePoint::Interval(r)) => r.in_unit_interval(),
            (MetricSpaceDescriptor::Circle, SpacePoint::Circle(r)) => r.in_unit_interval(),
            (MetricSpaceDescriptor::Shift { alphabet }, SpacePoint::Shift(w)) => w.alphabet == *alphabet,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleSpace { point: p.kind_name(), space: self.name() })
        }
    }

    /// Build a point of this space from a real coordinate (interval and circle only).
    pub fn point(&self, coordinate: Real) -> Result<SpacePoint> {
        match self {
            MetricSpaceDescriptor::UnitInterval => {
                if !coordinate.in_unit_interval() {
                    return Err(Error::InvalidParameter(format!("{coordinate} is outside [0, 1]")));
                }
                Ok(SpacePoint::Interval(coordinate))
            }
            MetricSpaceDescriptor::Circle => Ok(SpacePoint::Circle(coordinate.frac())),
            MetricSpaceDescriptor::Shift { .. } => {
                Err(Error::IncompatibleSpace { point: "real", space: self.name() })
            }
        }
    }

    /// Uniform random point carrying `bits` random binary digits, or for the
    /// shift a uniform symbol window of length `window`.
    pub fn random_point<R: RngCore + ?Sized>(&self, rng: &mut R, bits: u32, window: usize) -> SpacePoint {
        match self {
            MetricSpaceDescriptor::UnitInterval => SpacePoint::Interval(Real::Dyadic(Fixed::random(rng, bits))),
            MetricSpaceDescriptor::Circle => SpacePoint::Circle(Real::Dyadic(Fixed::random(rng, bits))),
            MetricSpaceDescriptor::Shift { alphabet } => {
                let symbols: Vec<u8> = (0..window).map(|_| rng.gen_range(0..*alphabet)).collect();
                SpacePoint::Shift(Word::new(*alphabet, symbols))
            }
        }
    }
}

/// A real coordinate, either an exact rational or a dyadic fixed-point value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Real {
    Rational(BigRational),
    Dyadic(Fixed),
}

impl Real {
    pub fn from_f64(v: f64) -> Result<Self> {
        // shortest round-trip decimal, so 0.7 means 7/10
        format!("{v}").parse()
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Real::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Rational(q) => rational_to_f64(q),
            Real::Dyadic(f) => f.to_f64(),
        }
    }

    /// Round to `bits` binary digits; the flag reports exactness.
    pub fn to_fixed(&self, bits: u32) -> Result<(Fixed, bool)> {
        match self {
            Real::Rational(q) => Fixed::from_rational(q, bits),
            Real::Dyadic(f) => Ok(f.with_bits(bits)),
        }
    }

    pub fn frac(&self) -> Self {
        match self {
            Real::Rational(q) => Real::Rational(q - q.floor()),
            Real::Dyadic(f) => Real::Dyadic(f.frac()),
        }
    }

    fn in_unit_interval(&self) -> bool {
        match self {
            Real::Rational(q) => !q.is_negative() && *q <= BigRational::one(),
            Real::Dyadic(f) => *f <= Fixed::one(f.bits().max(1)),
        }
    }

    /// Exact value as a rational.
    pub fn to_rational(&self) -> BigRational {
        match self {
            Real::Rational(q) => q.clone(),
            Real::Dyadic(f) => f.to_rational(),
        }
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => Fixed::from_rational(&q.abs(), 80).map(|(f, _)| f.to_f64()).unwrap_or(f64::NAN),
    }
}

impl FromStr for Real {
    type Err = Error;

    /// Accepts decimals (`0.7`, `1e-4`), fractions (`1/3`), `golden`, and the
    /// exact dyadic form `0x<hex>p-<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "golden" {
            return Err(Error::Parse("`golden` is a parameter constant, not an exact coordinate".into()));
        }
        if s.starts_with("0x") {
            return Fixed::parse(s).map(Real::Dyadic);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Real::Rational(BigRational::new(n, d)));
        }
        parse_decimal(s).map(Real::Rational)
    }
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        q = -q;
    }
    Ok(q)
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Rational(q) => write!(f, "{q}"),
            Real::Dyadic(x) => write!(f, "{}", x.to_hex()),
        }
    }
}

/// A finite window onto a one-sided symbol sequence. Shifting advances the
/// offset into a shared buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    alphabet: u8,
    symbols: Arc<[u8]>,
    offset: usize,
}

impl Word {
    pub fn new(alphabet: u8, symbols: Vec<u8>) -> Self {
        Word { alphabet, symbols: symbols.into(), offset: 0 }
    }

    /// `0^(2^0) 1^(2^0) 0^(2^1) 1^(2^1) ...` truncated to `len` symbols.
    pub fn alternating_blocks(len: usize) -> Self {
        let mut symbols = Vec::with_capacity(len);
        let mut block = 1usize;
        while symbols.len() < len {
            for s in [0u8, 1u8] {
                let take = block.min(len - symbols.len());
                symbols.extend(std::iter::repeat_n(s, take));
            }
            block *= 2;
        }
        Word::new(2, symbols)
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn window_len(&self) -> usize {
        self.symbols.len() - self.offset
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols[self.offset..]
    }

    pub fn symbol(&self, i: usize) -> Option<u8> {
        self.symbols().get(i).copied()
    }

    /// The shifted sequence `sigma^k w`.
    pub fn shifted(&self, k: usize) -> Result<Word> {
        if k >= self.window_len() {
            return Err(Error::WindowTooShort { available: self.window_len(), horizon: k });
        }
        Ok(Word { alphabet: self.alphabet, symbols: self.symbols.clone(), offset: self.offset + k })
    }

    /// A copy agreeing on the first `j` symbols and differing at index `j`.
    pub fn flipped_at(&self, j: usize) -> Word {
        let mut s = self.symbols().to_vec();
        if j < s.len() {
            s[j] = (s[j] + 1) % self.alphabet;
        }
        Word::new(self.alphabet, s)
    }

    /// `sum_j w_j a^-(j+1)` over the first 53 symbols, normalised into `[0, 1]`.
    pub fn coordinate(&self) -> f64 {
        let a = self.alphabet as f64;
        let mut scale = 1.0;
        let mut acc = 0.0;
        for &s in self.symbols().iter().take(COORDINATE_DEPTH) {
            scale /= a;
            acc += s as f64 * scale;
        }
        acc
    }

    fn first_difference(&self, other: &Word) -> Option<usize> {
        self.symbols().iter().zip(other.symbols()).position(|(a, b)| a != b)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits: String = self
            .symbols()
            .iter()
            .map(|&s| char::from_digit(s as u32, 36).unwrap_or('?'))
            .collect();
        write!(f, "symbols:{}:{}", self.alphabet, digits)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpacePoint {
    Interval(Real),
    /// Coordinate reduced into `[0, 1)`.
    Circle(Real),
    Shift(Word),
}

impl SpacePoint {
    pub fn interval(v: Real) -> Self {
        SpacePoint::Interval(v)
    }

    pub fn circle(v: Real) -> Self {
        SpacePoint::Circle(v.frac())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpacePoint::Interval(_) => "interval",
            SpacePoint::Circle(_) => "circle",
            SpacePoint::Shift(_) => "shift",
        }
    }

    /// Real-valued embedding: the coordinate itself, or the base-`a` value of
    /// a symbol window.
    pub fn coordinate(&self) -> f64 {
        match self {
            SpacePoint::Interval(r) => r.to_f64(),
            SpacePoint::Circle(r) => {
                let v = r.to_f64();
                if v >= 1.0 {
                    0.0
                } else {
                    v
                }
            }
            SpacePoint::Shift(w) => w.coordinate(),
        }
    }

    pub fn real(&self) -> Option<&Real> {
        match self {
            SpacePoint::Interval(r) | SpacePoint::Circle(r) => Some(r),
            SpacePoint::Shift(_) => None,
        }
    }

    pub fn word(&self) -> Option<&Word> {
        match self {
            SpacePoint::Shift(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for SpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpacePoint::Interval(r) | SpacePoint::Circle(r) => write!(f, "{r}"),
            SpacePoint::Shift(w) => write!(f, "{w}"),
        }
    }
}

impl Serialize for SpacePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parse the textual form produced by `Display` back into a point of `space`.
pub fn parse_point(space: &MetricSpaceDescriptor, text: &str) -> Result<SpacePoint> {
    match space {
        MetricSpaceDescriptor::Shift { alphabet } => {
            let body = text
                .strip_prefix("symbols:")
                .ok_or_else(|| Error::Parse(format!("shift points are written symbols:<a>:<digits>, got {text:?}")))?;
            let (a, digits) = body.split_once(':').unwrap_or(("", body));
            if !a.is_empty() && a.parse::<u8>().ok() != Some(*alphabet) {
                return Err(Error::Parse(format!("alphabet mismatch in {text:?}")));
            }
            let symbols = digits
                .chars()
                .map(|c| {
                    c.to_digit(36)
                        .filter(|&d| d < *alphabet as u32)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::Parse(format!("symbol {c:?} outside alphabet")))
                })
                .collect::<Result<Vec<u8>>>()?;
            Ok(SpacePoint::Shift(Word::new(*alphabet, symbols)))
        }
        _ => space.point(text.parse()?),
    }
}

/// The metric `d` of `space`.
pub fn distance(space: &MetricSpaceDescriptor, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
    space.check(p)?;
    space.check(q)?;
    Ok(match (p, q) {
        (SpacePoint::Interval(a), SpacePoint::Interval(b)) => real_distance(a, b, false),
        (SpacePoint::Circle(a), SpacePoint::Circle(b)) => real_distance(a, b, true),
        (SpacePoint::Shift(a), SpacePoint::Shift(b)) => match a.first_difference(b) {
            Some(j) => f64::powi(0.5, j as i32),
            None => 0.0,
        },
        _ => unreachable!("checked above"),
    })
}

fn real_distance(a: &Real, b: &Real, circle: bool) -> f64 {
    match (a, b) {
        (Real::Dyadic(x), Real::Dyadic(y)) => {
            if circle {
                x.circle_distance(y).to_f64()
            } else {
                x.abs_diff(y).to_f64()
            }
        }
        _ => {
            let d = (a.to_rational() - b.to_rational()).abs();
            let d = if circle {
                let d = &d - d.floor();
                let w = BigRational::one() - &d;
                if w < d {
                    w
                } else {
                    d
                }
            } else {
                d
            };
            rational_to_f64(&d)
        }
    }
}
