//! Named configurations, one per documented experiment.

use orbdist_core::analysis::{Sampler, WmeConfig};
use orbdist_core::dynsys::{Family, Param};
use orbdist_core::estimator::{GenericConfig, NfConfig, Observable, Schedule};
use orbdist_core::matching::SolverKind;

use crate::config::{Command, ProbeKind, RunConfig, Suite};
use crate::error::CliError;

pub const PRESETS: &[(&str, &str)] = &[
    ("thm13-rotation", "unique-ergodicity probe, golden rotation, 20 random pairs up to n = 4096"),
    ("thm13-doubling", "unique-ergodicity probe, doubling map, fixed point 0 against a random point"),
    ("s1-wme", "equicontinuity scan of the circle example map with random pairs and the contrast gap at 0"),
    ("oracle-suite", "exact solver against enumeration; 1-D solvers against the exact solver"),
    ("prop31-suite", "symmetry and triangle inequality on random triples, five families, n = 64"),
    ("prop32-suite", "shifted-window bound, r + s <= 16, n = 256"),
    ("prop34-suite", "partition bounds on rotation and circle example pairs, n up to 4096"),
    ("thm15-s1", "time-average continuity scan of the circle example map"),
    ("thm15-doubling", "time-average continuity scan of the doubling map"),
    ("ergodicity-atoms", "ergodicity probe, two-atom mixture on the identity map, 400 pairs"),
    ("ergodicity-doubling", "ergodicity probe, Lebesgue measure for the doubling map, 100 pairs"),
    ("physical-s1", "physical-measure probe, circle example map, 40 Lebesgue points"),
    ("physical-doubling", "physical-measure probe, doubling map, 40 Lebesgue points"),
    ("physical-identity", "physical-measure probe, identity map, 40 Lebesgue points at tol 1e-6"),
    ("bench", "solver timings across sizes"),
];

fn golden() -> Family {
    Family::Rotation { alpha: Param::Golden }
}

fn schedule(lo: u32, hi: u32) -> Schedule {
    Schedule::powers_of_two(lo, hi).expect("valid range")
}

fn base(command: Command, system: Family) -> RunConfig {
    RunConfig { command: Some(command), system, seed: 20_240_601, ..Default::default() }
}

fn probe(kind: ProbeKind, system: Family) -> RunConfig {
    let mut c = base(Command::Probe, system);
    c.probe.kind = kind;
    c
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let c = match name {
        "thm13-rotation" => {
            let mut c = probe(ProbeKind::UniqueErgodicity, golden());
            c.solver.kind = SolverKind::Cyclic;
            let ue = &mut c.probe.unique_ergodicity;
            ue.num_pairs = 20;
            ue.designated = false;
            ue.nf.schedule = schedule(6, 12);
            c
        }
        "thm13-doubling" => {
            let mut c = probe(ProbeKind::UniqueErgodicity, Family::Doubling);
            let ue = &mut c.probe.unique_ergodicity;
            ue.num_pairs = 1;
            ue.designated = true;
            ue.nf.schedule = schedule(6, 12);
            c
        }
        "s1-wme" => {
            let mut c = base(Command::ScanWme, Family::PaperS1);
            c.scan_wme.scan = WmeConfig { n: 2048, ..Default::default() };
            c.scan_wme.random_pairs = 20;
            c.scan_wme.contrast_pairs = vec![["0".into(), "1/10000".into()]];
            c
        }
        "oracle-suite" => {
            let mut c = base(Command::CheckProps, Family::Identity);
            c.check_props.suites = vec![Suite::Oracle, Suite::OneD];
            c
        }
        "prop31-suite" => {
            let mut c = base(Command::CheckProps, Family::Identity);
            c.check_props.suites = vec![Suite::Triples];
            c.check_props.systems =
                vec![Family::Identity, golden(), Family::Doubling, Family::PaperS1, Family::FullShift { alphabet: 2 }];
            c
        }
        "prop32-suite" => {
            let mut c = base(Command::CheckProps, Family::Identity);
            c.check_props.suites = vec![Suite::Shift];
            c.check_props.systems = vec![golden(), Family::Doubling, Family::PaperS1, Family::FullShift { alphabet: 2 }];
            c
        }
        "prop34-suite" => {
            let mut c = base(Command::CheckProps, Family::Identity);
            c.check_props.suites = vec![Suite::Partition];
            c.check_props.systems = vec![golden(), Family::PaperS1];
            c.check_props.partition_schedule = schedule(6, 12);
            c
        }
        "thm15-s1" => {
            let mut c = base(Command::ScanTa, Family::PaperS1);
            c.scan_ta.observables = vec![Observable::Coordinate, Observable::ArcFromZero];
            c.scan_ta.scan.deltas = vec![0.1, 0.05, 0.01];
            c
        }
        "thm15-doubling" => {
            let mut c = base(Command::ScanTa, Family::Doubling);
            c.scan_ta.observables = vec![Observable::Coordinate];
            c.scan_ta.scan.deltas = vec![0.1, 0.05, 0.01];
            c
        }
        "ergodicity-atoms" => {
            let mut c = probe(ProbeKind::Ergodicity, Family::Identity);
            let e = &mut c.probe.ergodicity;
            e.sampler = Sampler::Atoms { atoms: vec!["0.2".into(), "0.7".into()] };
            e.num_pairs = 400;
            e.nf.schedule = schedule(4, 8);
            c
        }
        "ergodicity-doubling" => {
            let mut c = probe(ProbeKind::Ergodicity, Family::Doubling);
            let e = &mut c.probe.ergodicity;
            e.sampler = Sampler::Lebesgue;
            e.num_pairs = 100;
            e.nf.schedule = schedule(9, 15);
            c
        }
        "physical-s1" => {
            let mut c = probe(ProbeKind::Physical, Family::PaperS1);
            c.probe.physical.num_points = 40;
            c
        }
        "physical-doubling" => {
            let mut c = probe(ProbeKind::Physical, Family::Doubling);
            let p = &mut c.probe.physical;
            p.num_points = 40;
            p.nf = NfConfig { schedule: schedule(8, 14), ..Default::default() };
            p.generic = GenericConfig { schedule: schedule(8, 14), ..Default::default() };
            c
        }
        "physical-identity" => {
            let mut c = probe(ProbeKind::Physical, Family::Identity);
            c.tolerance = Some(1e-6);
            c.probe.physical.num_points = 40;
            c
        }
        "bench" => base(Command::Bench, Family::Identity),
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            return Err(CliError::Config(format!("unknown preset {other:?}; known: {}", names.join(", "))));
        }
    };
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_builds() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap();
            assert!(c.command.is_some(), "{name}");
            c.spec().unwrap();
        }
    }
}
