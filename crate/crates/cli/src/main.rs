use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orbdist::config::{Command, Overrides};
use orbdist::presets::PRESETS;
use orbdist::Invocation;
use orbdist_core::matching::SolverKind;

#[derive(Parser)]
#[command(name = "orbdist", version, about = "Orbit-distribution distances for dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Orbit coordinates as CSV.
    Orbit(Common),
    /// F_n(x, y) for one n.
    Fdist(Common),
    /// F_n(x, y) along a schedule, with limit estimates.
    Fseq(Common),
    /// Equicontinuity scan of the orbit distance.
    ScanWme(Common),
    /// Continuity scan of time averages.
    ScanTa(Common),
    /// Unique-ergodicity, ergodicity or physical-measure probe.
    Probe(Common),
    /// Property suites; exits 1 on any violation.
    CheckProps(Common),
    /// Solver timings.
    Bench(Common),
    /// List the named presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// JSON config file, layered over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset; see `orbdist presets`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; `.csv` selects the table view. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// auto, bruteforce, exact, sorted, cyclic or entropic.
    #[arg(long)]
    solver: Option<String>,
    /// Orbit length, or number of pairs/points for probes.
    #[arg(long)]
    n: Option<usize>,
    /// Verdict tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown solver {s:?}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Orbit(c) => (Command::Orbit, c),
        Sub::Fdist(c) => (Command::Fdist, c),
        Sub::Fseq(c) => (Command::Fseq, c),
        Sub::ScanWme(c) => (Command::ScanWme, c),
        Sub::ScanTa(c) => (Command::ScanTa, c),
        Sub::Probe(c) => (Command::Probe, c),
        Sub::CheckProps(c) => (Command::CheckProps, c),
        Sub::Bench(c) => (Command::Bench, c),
        Sub::Presets => {
            for (name, about) in PRESETS {
                println!("{name:<22} {about}");
            }
            return ExitCode::SUCCESS;
        }
    };
    let solver = match common.solver.as_deref().map(parse_solver).transpose() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let inv = Invocation {
        command,
        preset: common.preset,
        config: common.config,
        out: common.out,
        overrides: Overrides { seed: common.seed, solver, n: common.n, tol: common.tol, precision_bits: None },
    };
    match orbdist::execute(&inv) {
        Ok(out) => match &out.report.failure {
            Some(msg) => {
                eprintln!("failed: {msg}");
                ExitCode::from(1)
            }
            None => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
