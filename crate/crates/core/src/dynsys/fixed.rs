//! Arbitrary-precision binary fixed point.
//!
//! A [`Fixed`] is the nonnegative dyadic rational `mant / 2^bits`. Orbits of
//! expanding maps are iterated in this representation at a working precision
//! sized to the orbit horizon, then rounded down to a compact storage width.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fixed {
    mant: BigUint,
    bits: u32,
}

impl Fixed {
    pub fn from_parts(mant: BigUint, bits: u32) -> Self {
        Fixed { mant, bits }
    }

    pub fn zero(bits: u32) -> Self {
        Fixed { mant: BigUint::zero(), bits }
    }

    pub fn one(bits: u32) -> Self {
        Fixed { mant: BigUint::one() << bits, bits }
    }

    pub fn half(bits: u32) -> Self {
        Fixed { mant: BigUint::one() << (bits - 1), bits }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mant
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// Uniform sample from `[0, 1)` with `bits` random binary digits.
    pub fn random<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> Self {
        let words = (bits as usize).div_ceil(32);
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        let spare = (words * 32) as u32 - bits;
        if spare > 0 {
            if let Some(top) = digits.last_mut() {
                *top >>= spare;
            }
        }
        Fixed { mant: BigUint::new(digits), bits }
    }

    /// Round `num/den` to the nearest multiple of `2^-bits`. The flag is true
    /// when the conversion was exact.
    pub fn from_ratio(num: &BigUint, den: &BigUint, bits: u32) -> (Self, bool) {
        let scaled: BigUint = num << bits;
        let (q, r) = scaled.div_rem(den);
        let exact = r.is_zero();
        let mant = if (&r << 1u32) >= *den { q + 1u32 } else { q };
        (Fixed { mant, bits }, exact)
    }

    pub fn from_rational(q: &BigRational, bits: u32) -> Result<(Self, bool)> {
        if q.is_negative() {
            return Err(Error::InvalidParameter(format!("negative coordinate {q}")));
        }
        let num = q.numer().to_biguint().unwrap_or_default();
        let den = q.denom().to_biguint().unwrap_or_else(BigUint::one);
        Ok(Self::from_ratio(&num, &den, bits))
    }

    /// `(sqrt(5) - 1) / 2` rounded down; error below `2^-bits`.
    pub fn golden(bits: u32) -> Self {
        let five_scaled: BigUint = BigUint::from(5u32) << (2 * bits as usize + 2);
        // sqrt(5 * 4^(bits+1)) = 2^(bits+1) sqrt(5)
        let root = five_scaled.sqrt();
        let two_pow = BigUint::one() << (bits + 1);
        let mant = (root - two_pow) >> 2u32;
        Fixed { mant, bits }
    }

    /// Change precision, rounding to nearest when bits are dropped.
    pub fn with_bits(&self, bits: u32) -> (Self, bool) {
        match bits.cmp(&self.bits) {
            Ordering::Equal => (self.clone(), true),
            Ordering::Greater => (Fixed { mant: &self.mant << (bits - self.bits), bits }, true),
            Ordering::Less => {
                let drop = self.bits - bits;
                let q: BigUint = &self.mant >> drop;
                let low_mask = (BigUint::one() << drop) - 1u32;
                let rem = &self.mant & &low_mask;
                let exact = rem.is_zero();
                let half = BigUint::one() << (drop - 1);
                let mant = if rem >= half { q + 1u32 } else { q };
                (Fixed { mant, bits }, exact)
            }
        }
    }

    /// Reduce modulo 1.
    pub fn frac(&self) -> Self {
        let mask = (BigUint::one() << self.bits) - 1u32;
        Fixed { mant: &self.mant & mask, bits: self.bits }
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let len = self.mant.bits();
        let (top, shift) = if len > 64 {
            ((&self.mant >> (len - 64)).to_u64().unwrap_or(u64::MAX), (len - 64) as i64)
        } else {
            (self.mant.to_u64().unwrap_or(0), 0)
        };
        let exp = shift - self.bits as i64;
        (top as f64) * f64::powi(2.0, exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from_biguint(Sign::Plus, self.mant.clone()),
            BigInt::from_biguint(Sign::Plus, BigUint::one() << self.bits),
        )
    }

    /// Absolute difference at the finer of the two precisions.
    pub fn abs_diff(&self, other: &Fixed) -> Fixed {
        let bits = self.bits.max(other.bits);
        let a = self.aligned(bits);
        let b = other.aligned(bits);
        let mant = if a >= b { a - b } else { b - a };
        Fixed { mant, bits }
    }

    /// Arc distance on `R/Z` for two points already reduced into `[0, 1)`.
    pub fn circle_distance(&self, other: &Fixed) -> Fixed {
        let d = self.abs_diff(other);
        let full = BigUint::one() << d.bits;
        let wrap = &full - &d.mant;
        if wrap < d.mant {
            Fixed { mant: wrap, bits: d.bits }
        } else {
            d
        }
    }

    fn aligned(&self, bits: u32) -> BigUint {
        &self.mant << (bits - self.bits)
    }

    /// Hex mantissa form `0x<hex>p-<bits>`, exact and parseable by [`Fixed::parse`].
    pub fn to_hex(&self) -> String {
        format!("0x{}p-{}", self.mant.to_str_radix(16), self.bits)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let body = text
            .strip_prefix("0x")
            .ok_or_else(|| Error::Parse(format!("expected 0x prefix in {text:?}")))?;
        let (hex, bits) = body
            .split_once("p-")
            .ok_or_else(|| Error::Parse(format!("expected p-<bits> suffix in {text:?}")))?;
        let mant = BigUint::parse_bytes(hex.as_bytes(), 16)
            .ok_or_else(|| Error::Parse(format!("bad hex mantissa in {text:?}")))?;
        let bits: u32 = bits.parse().map_err(|_| Error::Parse(format!("bad exponent in {text:?}")))?;
        Ok(Fixed { mant, bits })
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        let bits = self.bits.max(other.bits);
        self.aligned(bits).cmp(&other.aligned(bits))
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}
