//! Library side of the `orbdist` command-line tool: config resolution,
//! command dispatch and report encoding. `main.rs` only parses arguments.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use config::{Command, Overrides, RunConfig};
use error::CliError;
use report::{Report, Table};

/// What a single invocation asks for.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub overrides: Overrides,
}

pub struct RunOutput {
    pub report: Report,
    pub table: Table,
}

impl RunOutput {
    pub fn failed(&self) -> bool {
        self.report.failure.is_some()
    }
}

/// Resolve the config and run the command, without writing anything.
pub fn run(inv: &Invocation) -> Result<RunOutput, CliError> {
    let mut overrides = inv.overrides.clone();
    if overrides.precision_bits.is_none() {
        overrides.precision_bits = config::precision_from_env()?;
    }
    let config = config::resolve(inv.command, inv.preset.as_deref(), inv.config.as_deref(), &overrides)?;
    run_config(config)
}

pub fn run_config(config: RunConfig) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let outcome = commands::run(&config)?;
    let report = Report {
        schema_version: report::SCHEMA_VERSION,
        tool_version: report::TOOL_VERSION,
        command: config.command.map_or("?", |c| c.name()),
        status: if outcome.failure.is_some() { "failed" } else { "ok" },
        failure: outcome.failure,
        config,
        results: outcome.results,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { report, table: outcome.table })
}

fn wants_csv(command: Command, out: Option<&Path>) -> bool {
    command == Command::Orbit || out.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Encode the output as CSV for `.csv` targets and for `orbit`, JSON otherwise.
pub fn render(inv: &Invocation, out: &RunOutput) -> Result<Vec<u8>, CliError> {
    if wants_csv(inv.command, inv.out.as_deref()) {
        out.table.to_csv()
    } else {
        Ok(out.report.to_json().into_bytes())
    }
}

/// Run and write the output to `--out` (atomically) or stdout.
pub fn execute(inv: &Invocation) -> Result<RunOutput, CliError> {
    let out = run(inv)?;
    let bytes = render(inv, &out)?;
    match &inv.out {
        Some(path) => report::write_atomic(path, &bytes)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(out)
}
