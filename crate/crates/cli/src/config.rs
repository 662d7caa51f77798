//! Run configuration: one JSON document per run, layered as
//! preset < config file < command-line flags.

use std::path::Path;

use orbdist_core::analysis::{
    BoundVariant, ErgodicityConfig, PhysicalConfig, TaScanConfig, UniqueErgodicityConfig, WmeConfig,
};
use orbdist_core::dynsys::{Family, PrecisionPolicy, SystemSpec};
use orbdist_core::estimator::{Observable, Schedule, DEFAULT_LIMIT_TOLERANCE, DEFAULT_TAIL_FRACTION};
use orbdist_core::matching::{SolverConfig, SolverKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const PRECISION_ENV: &str = "ORBDIST_PRECISION_BITS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Orbit,
    Fdist,
    Fseq,
    ScanWme,
    ScanTa,
    Probe,
    CheckProps,
    Bench,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Orbit => "orbit",
            Command::Fdist => "fdist",
            Command::Fseq => "fseq",
            Command::ScanWme => "scan-wme",
            Command::ScanTa => "scan-ta",
            Command::Probe => "probe",
            Command::CheckProps => "check-props",
            Command::Bench => "bench",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitParams {
    pub x: String,
    pub n: usize,
    pub start_index: usize,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams { x: "0".into(), n: 16, start_index: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdistParams {
    pub x: String,
    pub y: String,
    pub n: usize,
}

impl Default for FdistParams {
    fn default() -> Self {
        FdistParams { x: "0".into(), y: "0.5".into(), n: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FseqParams {
    pub x: String,
    pub y: String,
    pub schedule: Schedule,
    pub tail_fraction: f64,
    pub limit_tolerance: f64,
}

impl Default for FseqParams {
    fn default() -> Self {
        FseqParams {
            x: "0".into(),
            y: "0.5".into(),
            schedule: Schedule::default(),
            tail_fraction: DEFAULT_TAIL_FRACTION,
            limit_tolerance: DEFAULT_LIMIT_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanWmeParams {
    #[serde(flatten)]
    pub scan: WmeConfig,
    /// Extra random pairs whose `F_n` is reported at the scan length.
    pub random_pairs: usize,
    /// Pairs whose aligned mean gap is reported at the scan length.
    pub contrast_pairs: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanTaParams {
    pub observables: Vec<Observable>,
    #[serde(flatten)]
    pub scan: TaScanConfig,
}

impl Default for ScanTaParams {
    fn default() -> Self {
        ScanTaParams { observables: vec![Observable::Coordinate], scan: TaScanConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    UniqueErgodicity,
    Ergodicity,
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    pub kind: ProbeKind,
    pub unique_ergodicity: UniqueErgodicityConfig,
    pub ergodicity: ErgodicityConfig,
    pub physical: PhysicalConfig,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams {
            kind: ProbeKind::UniqueErgodicity,
            unique_ergodicity: UniqueErgodicityConfig::default(),
            ergodicity: ErgodicityConfig::default(),
            physical: PhysicalConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Exact solver against enumeration on small random matrices.
    Oracle,
    /// Sorted and cyclic solvers against the exact solver.
    OneD,
    /// Symmetry and triangle inequality of `F_n` on random triples.
    Triples,
    /// Finite-`n` bound for shifted orbit windows.
    Shift,
    /// Partition upper bounds.
    Partition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckParams {
    pub suites: Vec<Suite>,
    /// Systems the dynamical suites run on; empty means the run's system.
    pub systems: Vec<Family>,
    pub oracle_matrices: usize,
    pub oracle_max_n: usize,
    pub one_d_sets: usize,
    pub one_d_max_n: usize,
    pub triples: usize,
    pub triple_n: usize,
    pub shift_cases: usize,
    pub shift_n: usize,
    pub shift_max_total: usize,
    pub partition_pairs: usize,
    pub partition_epsilons: Vec<f64>,
    pub partition_schedule: Schedule,
    pub partition_variants: Vec<BoundVariant>,
    /// Named corruption applied to cost matrices, for exercising the
    /// failure path (`"asymmetric-cost"`).
    pub fault: Option<String>,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            suites: vec![Suite::Oracle, Suite::OneD, Suite::Triples, Suite::Shift, Suite::Partition],
            systems: Vec::new(),
            oracle_matrices: 200,
            oracle_max_n: 8,
            one_d_sets: 50,
            one_d_max_n: 128,
            triples: 100,
            triple_n: 64,
            shift_cases: 50,
            shift_n: 256,
            shift_max_total: 16,
            partition_pairs: 10,
            partition_epsilons: vec![0.1, 0.05],
            partition_schedule: Schedule::default(),
            partition_variants: vec![BoundVariant::Upper, BoundVariant::Lower],
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchParams {
    pub sorted: Vec<usize>,
    pub cyclic: Vec<usize>,
    pub exact: Vec<usize>,
    pub entropic: Vec<usize>,
    /// Timed repetitions per row; the minimum is reported.
    pub repeats: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        let pow = |lo: u32, hi: u32| (lo..=hi).map(|k| 1usize << k).collect::<Vec<_>>();
        let mut sorted = pow(6, 16);
        sorted.push(1_000_000);
        BenchParams { sorted, cyclic: pow(6, 16), exact: pow(6, 9), entropic: pow(6, 8), repeats: 3 }
    }
}

/// Everything a run depends on. Reports embed the resolved value, and
/// re-running it reproduces the report payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub system: Family,
    pub precision: PrecisionPolicy,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Membership threshold used by probes.
    pub tolerance: Option<f64>,
    pub orbit: OrbitParams,
    pub fdist: FdistParams,
    pub fseq: FseqParams,
    pub scan_wme: ScanWmeParams,
    pub scan_ta: ScanTaParams,
    pub probe: ProbeParams,
    pub check_props: CheckParams,
    pub bench: BenchParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            system: Family::Identity,
            precision: PrecisionPolicy::default(),
            seed: 0,
            solver: SolverConfig::default(),
            tolerance: None,
            orbit: OrbitParams::default(),
            fdist: FdistParams::default(),
            fseq: FseqParams::default(),
            scan_wme: ScanWmeParams::default(),
            scan_ta: ScanTaParams::default(),
            probe: ProbeParams::default(),
            check_props: CheckParams::default(),
            bench: BenchParams::default(),
        }
    }
}

/// Command-line overrides, applied last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub solver: Option<SolverKind>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub precision_bits: Option<u64>,
}

impl RunConfig {
    pub fn spec(&self) -> Result<SystemSpec, CliError> {
        Ok(SystemSpec::new(self.system.clone()).map_err(CliError::from_core)?.with_precision(self.precision))
    }

    /// Copy the run-wide seed, solver and tolerance into every section so the
    /// echoed config is self-describing.
    fn propagate(&mut self) {
        let seed = self.seed;
        let solver = self.solver;
        self.scan_wme.scan.seed = seed;
        self.scan_wme.scan.solver = solver;
        self.scan_ta.scan.seed = seed;
        let p = &mut self.probe;
        p.unique_ergodicity.seed = seed;
        p.ergodicity.seed = seed;
        p.physical.seed = seed;
        p.unique_ergodicity.nf.solver = solver;
        p.ergodicity.nf.solver = solver;
        p.physical.nf.solver = solver;
        if let Some(tol) = self.tolerance {
            p.unique_ergodicity.nf.tolerance = tol;
            p.ergodicity.nf.tolerance = tol;
            p.physical.nf.tolerance = tol;
            p.physical.generic.tolerance = tol;
        }
    }

    fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(kind) = o.solver {
            self.solver.kind = kind;
        }
        if let Some(tol) = o.tol {
            if !(tol > 0.0) {
                return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
            }
            self.tolerance = Some(tol);
        }
        if let Some(bits) = o.precision_bits {
            self.precision.max_bits = bits;
        }
        if let Some(n) = o.n {
            if n == 0 {
                return Err(CliError::Config("--n must be at least 1".into()));
            }
            match self.command {
                Some(Command::Orbit) => self.orbit.n = n,
                Some(Command::Fdist) => self.fdist.n = n,
                Some(Command::ScanWme) => self.scan_wme.scan.n = n,
                Some(Command::Probe) => {
                    let ue = &mut self.probe.unique_ergodicity;
                    ue.num_pairs = n;
                    self.probe.ergodicity.num_pairs = n;
                    self.probe.physical.num_points = n;
                }
                Some(Command::Fseq) => {
                    self.fseq.schedule = Schedule::single(n).map_err(CliError::from_core)?;
                }
                Some(c) => return Err(CliError::Config(format!("--n has no meaning for {}", c.name()))),
                None => {}
            }
        }
        Ok(())
    }
}

/// Merge `overlay` into `base`: objects merge key by key, everything else is
/// replaced.
pub fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Environment override of the precision ceiling.
pub fn precision_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{PRECISION_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Build the effective config for `command`.
pub fn resolve(
    command: Command,
    preset: Option<&str>,
    config_path: Option<&Path>,
    overrides: &Overrides,
) -> Result<RunConfig, CliError> {
    let mut value = match preset {
        Some(name) => {
            let p = crate::presets::preset(name)?;
            if p.command != Some(command) {
                let wanted = p.command.map_or("?", |c| c.name());
                return Err(CliError::Config(format!("preset {name} belongs to command {wanted}")));
            }
            serde_json::to_value(p).expect("config serializes")
        }
        None => serde_json::to_value(RunConfig::default()).expect("config serializes"),
    };
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let overlay: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut value, overlay);
    }
    let mut config: RunConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(c) = config.command {
        if c != command {
            return Err(CliError::Config(format!("config is for {} but {} was requested", c.name(), command.name())));
        }
    }
    config.command = Some(command);
    config.apply(overrides)?;
    config.propagate();
    config.spec()?;
    Ok(config)
}
