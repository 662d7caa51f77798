use thiserror::Error;

/// Errors raised by the orbit, matching and probe layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point of kind {point} does not belong to a {space} space")]
    IncompatibleSpace { point: &'static str, space: &'static str },

    #[error("family {family} cannot act on a {space} space")]
    IncompatibleFamily { family: &'static str, space: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("orbit length must be at least 1")]
    EmptyOrbit,

    #[error("precision budget exhausted: {required} bits required, ceiling is {ceiling}")]
    PrecisionExhausted { required: u64, ceiling: u64 },

    #[error("symbol window of length {available} cannot serve an orbit horizon of {horizon}")]
    WindowTooShort { available: usize, horizon: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("brute-force enumeration limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("solver {solver} is not valid on a {space} metric")]
    SolverMetricMismatch { solver: &'static str, space: &'static str },

    #[error("entropic solver did not converge in {iterations} iterations (marginal error {marginal_error:e})")]
    NotConverged { iterations: usize, marginal_error: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by exhausted numeric resources rather than bad input.
    pub fn is_resource_exhaustion(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted { .. } | Error::WindowTooShort { .. } | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
