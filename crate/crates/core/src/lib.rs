//! Permutation-infimum orbit distances.
//!
//! For a map `T` on a compact metric space, the quantity
//!
//! ```text
//! F_n(x, y) = min over permutations s of (1/n) sum_{k=1..n} d(T^k x, T^{s(k)} y)
//! ```
//!
//! is the Wasserstein-1 distance between the empirical measures of two orbit
//! segments. This crate generates orbits ([`dynsys`]), evaluates `F_n` with
//! several assignment solvers ([`matching`]), estimates its limsup/liminf
//! ([`estimator`]) and turns ergodic-theoretic characterisations into
//! numerical probes ([`analysis`]).

pub mod analysis;
pub mod dynsys;
pub mod error;
pub mod estimator;
pub mod matching;

pub use error::{Error, Result};
