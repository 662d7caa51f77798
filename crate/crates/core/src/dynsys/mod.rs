//! Metric spaces, map families and precision-tracked orbit generation.
//!
//! Interval and circle orbits of expanding maps are iterated in binary fixed
//! point at `required_precision` bits, so that stored iterates stay within
//! `2^-64` of the diameter of the true orbit. Full-shift orbits are exact
//! windows into a shared symbol buffer.

mod fixed;
mod orbit;
mod space;
mod system;

pub use fixed::Fixed;
pub use orbit::{iterate_point, orbit_segment, segment_distance, OrbitSegment, STORE_BITS};
pub use space::{distance, parse_point, MetricSpaceDescriptor, Real, SpacePoint, Word};
pub use system::{required_precision, step, Family, Param, PrecisionPolicy, SystemSpec};
