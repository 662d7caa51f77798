//! Limit estimates for `F_n` and the pointwise probes built on them.
//!
//! `limsup` and `liminf` are read off a tail window of a geometric schedule of
//! orbit lengths. Every decision is tri-state: a probe abstains rather than
//! guess when the tail has not settled.

mod average;
mod identities;
mod observable;
mod sequence;
mod verdict;

pub use average::{
    generic_probe, generic_probe_detail, time_average, time_averages, GenericConfig, GenericReport, TimeAverageReport,
};
pub use identities::{
    mean_gap, property_check, property_check_with, shift_invariance_check, PairValue, PropertyReport, ShiftCheck,
    Violation, IDENTITY_TOLERANCE,
};
pub use observable::{default_battery, Observable};
pub use sequence::{
    f_sequence, f_sequence_segments, limit_estimate, FSequence, LimitEstimate, Schedule, DEFAULT_LIMIT_TOLERANCE, DEFAULT_TAIL_FRACTION,
};
pub use verdict::{membership_from_estimate, nf_membership, nf_membership_segments, NfConfig, Status, Verdict, DEFAULT_MEMBERSHIP_TOLERANCE};

pub(crate) use identities::aligned_gap;
