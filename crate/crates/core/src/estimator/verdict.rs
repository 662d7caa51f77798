use std::fmt;

use serde::{Deserialize, Serialize};

use super::sequence::{f_sequence, f_sequence_segments, limit_estimate, LimitEstimate, Schedule, DEFAULT_LIMIT_TOLERANCE, DEFAULT_TAIL_FRACTION};
use crate::dynsys::{MetricSpaceDescriptor, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::Result;
use crate::matching::SolverConfig;

pub const DEFAULT_MEMBERSHIP_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A numerical conclusion about a limit statement.
///
/// `margin` is the distance to the decision threshold on the side of the
/// verdict. For an inconclusive verdict it is the spread (or other quantity)
/// that blocked a decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub margin: f64,
    pub diagnostics: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<LimitEstimate>,
}

impl Verdict {
    pub fn new(status: Status, margin: f64, diagnostics: impl Into<String>) -> Self {
        Verdict { status, margin, diagnostics: diagnostics.into(), estimate: None }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn fails(&self) -> bool {
        self.status == Status::Fails
    }
}

/// Settings shared by every `F`-membership decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NfConfig {
    pub schedule: Schedule,
    /// Threshold below which `F` counts as zero.
    pub tolerance: f64,
    /// Largest tail spread accepted as convergence.
    pub limit_tolerance: f64,
    pub tail_fraction: f64,
    pub solver: SolverConfig,
}

impl Default for NfConfig {
    fn default() -> Self {
        NfConfig {
            schedule: Schedule::default(),
            tolerance: DEFAULT_MEMBERSHIP_TOLERANCE,
            limit_tolerance: DEFAULT_LIMIT_TOLERANCE,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            solver: SolverConfig::default(),
        }
    }
}

/// Decide membership from a limit estimate.
pub fn membership_from_estimate(est: LimitEstimate, tol: f64) -> Verdict {
    let (status, margin, text) = if est.converged && est.fbar_hat <= tol {
        (Status::Holds, tol - est.fbar_hat, format!("fbar-hat {:.6e} <= tol {tol}", est.fbar_hat))
    } else if est.funder_hat > tol {
        (Status::Fails, est.funder_hat - tol, format!("funder-hat {:.6e} > tol {tol}", est.funder_hat))
    } else {
        (
            Status::Inconclusive,
            est.spread,
            format!(
                "funder-hat {:.6e} <= tol {tol} but fbar-hat {:.6e} with spread {:.6e} (limit tolerance {})",
                est.funder_hat, est.fbar_hat, est.spread, est.tolerance
            ),
        )
    };
    Verdict { status, margin, diagnostics: text, estimate: Some(est) }
}

/// Is `(x, y)` in `N(F)`? `Fails` also certifies the pair is outside the
/// liminf null set at this resolution.
pub fn nf_membership(spec: &SystemSpec, x: &SpacePoint, y: &SpacePoint, config: &NfConfig) -> Result<Verdict> {
    let seq = f_sequence(spec, x, y, &config.schedule, &config.solver)?;
    let est = limit_estimate(&seq, config.tail_fraction, config.limit_tolerance)?;
    Ok(membership_from_estimate(est, config.tolerance))
}

/// [`nf_membership`] on precomputed orbits.
pub fn nf_membership_segments(
    space: &MetricSpaceDescriptor,
    ox: &OrbitSegment,
    oy: &OrbitSegment,
    config: &NfConfig,
) -> Result<Verdict> {
    let seq = f_sequence_segments(space, ox, oy, &config.schedule, &config.solver)?;
    let est = limit_estimate(&seq, config.tail_fraction, config.limit_tolerance)?;
    Ok(membership_from_estimate(est, config.tolerance))
}
