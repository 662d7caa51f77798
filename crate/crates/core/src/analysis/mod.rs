//! System-level probes: equicontinuity scans, partition bounds, and sampled
//! tests of unique ergodicity, ergodicity and physical measures.
//!
//! Statements quantified over all of `X` are replaced by seeded random
//! samples together with each system's designated points (fixed points,
//! branch points, short periodic orbits).

mod partition;
mod probes;
mod sampling;
mod scan;

pub use partition::{
    partition_cover, prop34_bound, prop34_check, BoundVariant, PartitionConfig, PartitionCover, PartitionReport,
    PartitionRow,
};
pub use probes::{
    ergodicity_probe, physical_probe, unique_ergodicity_probe, Cluster, ErgodicityConfig, MeasureProbeReport,
    PairOutcome, PhysicalConfig, UniqueErgodicityConfig, UniqueErgodicityReport,
};
pub use sampling::{neighbor, sample_bits, sample_window, scan_grid, Sampler, Theta};
pub use scan::{ta_continuity_scan, wme_scan, EquicontinuityScan, ScanRow, TaScan, TaScanConfig, TaScanRow, WmeConfig};
