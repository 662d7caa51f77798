//! One function per command: run the computation, return the JSON results
//! and the CSV table view.

use std::time::Instant;

use orbdist_core::analysis::{
    ergodicity_probe, physical_probe, prop34_check, BoundVariant, sample_bits, sample_window, ta_continuity_scan,
    unique_ergodicity_probe, wme_scan, PartitionConfig, Sampler,
};
use orbdist_core::dynsys::{orbit_segment, parse_point, SpacePoint, SystemSpec};
use orbdist_core::estimator::{
    f_sequence, limit_estimate, mean_gap, property_check_with, shift_invariance_check, DEFAULT_TAIL_FRACTION,
    IDENTITY_TOLERANCE,
};
use orbdist_core::matching::{
    circle_distance, f_n_detail, match_segments, solve_bruteforce, solve_cyclic_circle, solve_entropic, solve_exact,
    solve_sorted_line, CostMatrix, MatchingResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ProbeKind, RunConfig, Suite};
use crate::error::CliError;
use crate::report::{Cell, Table};

/// Result of one command before it is wrapped into a report.
pub struct Outcome {
    pub results: Value,
    pub table: Table,
    /// Set when a probe or property check failed; the process exits with 1.
    pub failure: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn point(spec: &SystemSpec, text: &str) -> Result<SpacePoint, CliError> {
    parse_point(&spec.space, text).map_err(|e| CliError::Config(format!("point {text:?}: {e}")))
}

/// Independent stream for draws made by the cli layer, so they never
/// overlap with the core probes' streams for the same seed.
fn cli_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command.expect("resolved config names its command") {
        Command::Orbit => orbit(config),
        Command::Fdist => fdist(config),
        Command::Fseq => fseq(config),
        Command::ScanWme => scan_wme(config),
        Command::ScanTa => scan_ta(config),
        Command::Probe => probe(config),
        Command::CheckProps => check_props(config),
        Command::Bench => bench(config),
    }
}

fn orbit(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = config.spec()?;
    let p = &config.orbit;
    let x = point(&spec, &p.x)?;
    let seg = orbit_segment(&spec, &x, p.n, p.start_index)?;
    let mut table = Table::new(&["index", "coordinate"]);
    for (k, c) in seg.coordinates().iter().enumerate() {
        table.push(vec![Cell::from(p.start_index + k), Cell::from(*c)]);
    }
    let results = json!({
        "x": x,
        "n": p.n,
        "start_index": p.start_index,
        "coordinates": seg.coordinates(),
        "precision_bits": seg.precision_bits,
        "error_bound": seg.error_bound,
    });
    Ok(Outcome { results, table, failure: None })
}

fn matching_row(table: &mut Table, n: usize, r: &MatchingResult) {
    table.push(vec![
        Cell::from(n),
        Cell::from(r.solver.name()),
        Cell::from(r.mean_cost),
        Cell::from(r.total_cost),
        Cell::from(r.gap_bound),
        Cell::from(r.certified_optimal),
    ]);
}

fn fdist(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = config.spec()?;
    let p = &config.fdist;
    let (x, y) = (point(&spec, &p.x)?, point(&spec, &p.y)?);
    let r = f_n_detail(&spec, &x, &y, p.n, &config.solver)?;
    let mut table = Table::new(&["n", "solver", "mean_cost", "total_cost", "gap_bound", "certified_optimal"]);
    matching_row(&mut table, p.n, &r);
    let results = json!({
        "x": x,
        "y": y,
        "n": p.n,
        "f_n": r.mean_cost,
        "matching": r,
    });
    Ok(Outcome { results, table, failure: None })
}

fn fseq(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = config.spec()?;
    let p = &config.fseq;
    let (x, y) = (point(&spec, &p.x)?, point(&spec, &p.y)?);
    let seq = f_sequence(&spec, &x, &y, &p.schedule, &config.solver)?;
    let est = limit_estimate(&seq, p.tail_fraction, p.limit_tolerance)?;
    let mut table = Table::new(&["n", "value", "solver", "gap_bound"]);
    for (i, &n) in seq.schedule.points().iter().enumerate() {
        table.push(vec![
            Cell::from(n),
            Cell::from(seq.values[i]),
            Cell::from(seq.solvers[i].name()),
            Cell::from(seq.gap_bounds[i]),
        ]);
    }
    let results = json!({ "x": x, "y": y, "sequence": seq, "estimate": est });
    Ok(Outcome { results, table, failure: None })
}

fn scan_wme(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = config.spec()?;
    let p = &config.scan_wme;
    let scan = wme_scan(&spec, &p.scan)?;
    let n = p.scan.n;

    let mut rng = cli_rng(config.seed, 1);
    let mut random = Vec::with_capacity(p.random_pairs);
    for _ in 0..p.random_pairs {
        let x = Sampler::Lebesgue.sample(&spec, &mut rng, n)?;
        let y = Sampler::Lebesgue.sample(&spec, &mut rng, n)?;
        let ox = orbit_segment(&spec, &x, n, 1)?;
        let oy = orbit_segment(&spec, &y, n, 1)?;
        let r = match_segments(&spec.space, &ox, &oy, n, &config.solver)?;
        random.push(json!({ "x": x, "y": y, "f_n": r.mean_cost, "gap_bound": r.gap_bound }));
    }
    let max_random = random.iter().filter_map(|v| v["f_n"].as_f64()).fold(0.0, f64::max);

    let mut contrast = Vec::with_capacity(p.contrast_pairs.len());
    for [a, b] in &p.contrast_pairs {
        let (x, y) = (point(&spec, a)?, point(&spec, b)?);
        contrast.push(json!({ "x": x, "y": y, "mean_gap": mean_gap(&spec, &x, &y, n)? }));
    }

    let mut table = Table::new(&["delta", "modulus", "contrast_modulus", "pairs"]);
    for row in &scan.rows {
        table.push(vec![
            Cell::from(row.delta),
            Cell::from(row.modulus),
            Cell::from(row.contrast_modulus),
            Cell::from(row.pairs),
        ]);
    }
    let results = json!({
        "scan": scan,
        "random_pairs": random,
        "max_random_f_n": max_random,
        "contrast_pairs": contrast,
    });
    Ok(Outcome { results, table, failure: None })
}

fn scan_ta(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = config.spec()?;
    let p = &config.scan_ta;
    if p.observables.is_empty() {
        return Err(CliError::Config("scan_ta.observables is empty".into()));
    }
    let mut table = Table::new(&["observable", "delta", "modulus", "pairs"]);
    let mut scans = Vec::new();
    for f in &p.observables {
        let scan = ta_continuity_scan(&spec, f, &p.scan)?;
        for row in &scan.rows {
            table.push(vec![Cell::from(scan.observable.clone()), Cell::from(row.delta), Cell::from(row.modulus), Cell::from(row.pairs)]);
        }
        scans.push(scan);
    }
    Ok(Outcome { results: json!({ "scans": scans }), table, failure: None })
}

fn pair_table<'a>(pairs: impl Iterator<Item = &'a orbdist_core::analysis::PairOutcome>) -> Table {
    let mut table = Table::new(&["x", "y", "status", "margin", "fbar_hat", "funder_hat"]);
    for o in pairs {
        let est = o.verdict.estimate.as_ref();
        table.push(vec![
            Cell::from(o.x.to_string()),
            Cell::from(o.y.to_string()),
            Cell::from(o.verdict.status.name()),
            Cell::from(o.verdict.margin),
            Cell::from(est.map(|e| e.fbar_hat)),
            Cell::from(est.map(|e| e.funder_hat)),
        ]);
    }
    table
}

fn probe(config: &RunConfig) -> Result<Outcome, CliError> {
    let spec = config.spec()?;
    let p = &config.probe;
    match p.kind {
        ProbeKind::UniqueErgodicity => {
            let r = unique_ergodicity_probe(&spec, &p.unique_ergodicity)?;
            let failure = r
                .witness
                .as_ref()
                .map(|_| format!("not uniquely ergodic at this resolution: {}", r.verdict.diagnostics));
            Ok(Outcome { table: pair_table(r.pairs.iter()), results: to_value(&r), failure })
        }
        ProbeKind::Ergodicity => {
            let r = ergodicity_probe(&spec, &p.ergodicity)?;
            let failure = (!r.consistent).then(|| {
                format!(
                    "nf-fraction {} below 1 - 2 x abstention rate {}",
                    r.nf_fraction, r.abstention_rate
                )
            });
            Ok(Outcome { table: pair_table(r.pairs.iter()), results: to_value(&r), failure })
        }
        ProbeKind::Physical => {
            let r = physical_probe(&spec, &p.physical)?;
            let mut table = Table::new(&["cluster", "mass", "members", "candidate", "representative"]);
            for (i, c) in r.clusters.iter().enumerate() {
                table.push(vec![
                    Cell::from(i),
                    Cell::from(c.mass),
                    Cell::from(c.members.len()),
                    Cell::from(c.candidate),
                    Cell::from(c.representative.to_string()),
                ]);
            }
            Ok(Outcome { table, results: to_value(&r), failure: None })
        }
    }
}

/// Summary of one property suite on one system.
#[derive(Clone, Debug, Serialize)]
struct SuiteReport {
    suite: Suite,
    system: String,
    cases: usize,
    failures: usize,
    /// Largest excess over the allowed tolerance; `<= 0` when every case passed.
    max_excess: f64,
    /// First few failing cases.
    examples: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite, system: &str) -> Self {
        SuiteReport { suite, system: system.into(), cases: 0, failures: 0, max_excess: f64::NEG_INFINITY, examples: Vec::new() }
    }

    /// Record one case whose `excess` must be `<= 0`.
    fn record(&mut self, excess: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        self.max_excess = self.max_excess.max(excess);
        if excess > 0.0 || excess.is_nan() {
            self.failures += 1;
            if self.examples.len() < 10 {
                self.examples.push(describe());
            }
        }
    }
}

fn rel_excess(a: f64, b: f64, tol: f64) -> f64 {
    (a - b).abs() - tol * a.abs().max(b.abs())
}

fn oracle_suite(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<SuiteReport, CliError> {
    let p = &config.check_props;
    if p.oracle_max_n < 2 || p.oracle_max_n > orbdist_core::matching::BRUTEFORCE_MAX {
        return Err(CliError::Config(format!("oracle_max_n must be in 2..={}", orbdist_core::matching::BRUTEFORCE_MAX)));
    }
    let mut rep = SuiteReport::new(Suite::Oracle, "random matrices");
    for case in 0..p.oracle_matrices {
        let n = 2 + case % (p.oracle_max_n - 1);
        let entries: Vec<f64> = (0..n * n).map(|_| rng.gen()).collect();
        let c = CostMatrix::new(n, entries)?;
        let exact = solve_exact(&c);
        let brute = solve_bruteforce(&c)?;
        let excess = rel_excess(exact.total_cost, brute.total_cost, 1e-12);
        rep.record(excess, || format!("case {case} n={n}: exact {} vs enumeration {}", exact.total_cost, brute.total_cost));
    }
    Ok(rep)
}

fn one_d_suite(config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<SuiteReport>, CliError> {
    let p = &config.check_props;
    if p.one_d_max_n == 0 {
        return Err(CliError::Config("one_d_max_n must be positive".into()));
    }
    let mut line = SuiteReport::new(Suite::OneD, "sorted vs exact, interval");
    let mut circ = SuiteReport::new(Suite::OneD, "cyclic vs exact, circle");
    for case in 0..p.one_d_sets {
        let n = rng.gen_range(1..=p.one_d_max_n);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let cost = |d: fn(f64, f64) -> f64| CostMatrix::new(n, (0..n * n).map(|k| d(xs[k / n], ys[k % n])).collect());
        let s = solve_sorted_line(&xs, &ys)?;
        let e = solve_exact(&cost(|a, b| (a - b).abs())?);
        line.record((s.total_cost - e.total_cost).abs() - 1e-10, || {
            format!("case {case} n={n}: sorted {} vs exact {}", s.total_cost, e.total_cost)
        });
        let c = solve_cyclic_circle(&xs, &ys)?;
        let e = solve_exact(&cost(circle_distance)?);
        circ.record((c.total_cost - e.total_cost).abs() - 1e-10, || {
            format!("case {case} n={n}: cyclic {} vs exact {}", c.total_cost, e.total_cost)
        });
    }
    Ok(vec![line, circ])
}

fn random_points(spec: &SystemSpec, rng: &mut ChaCha8Rng, count: usize, horizon: usize) -> Vec<SpacePoint> {
    (0..count).map(|_| spec.space.random_point(rng, sample_bits(spec, horizon), sample_window(horizon))).collect()
}

fn systems(config: &RunConfig) -> Result<Vec<SystemSpec>, CliError> {
    if config.check_props.systems.is_empty() {
        return Ok(vec![config.spec()?]);
    }
    config
        .check_props
        .systems
        .iter()
        .map(|f| Ok(SystemSpec::new(f.clone())?.with_precision(config.precision)))
        .collect()
}

fn triples_suite(config: &RunConfig, spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<SuiteReport, CliError> {
    let p = &config.check_props;
    let asymmetric = match p.fault.as_deref() {
        None => false,
        Some("asymmetric-cost") => true,
        Some(other) => return Err(CliError::Config(format!("unknown fault {other:?}"))),
    };
    let mut rep = SuiteReport::new(Suite::Triples, spec.family.name());
    for case in 0..p.triples {
        let pts = random_points(spec, rng, 3, p.triple_n);
        let triple = [pts[0].clone(), pts[1].clone(), pts[2].clone()];
        let r = property_check_with(spec, &triple, p.triple_n, &config.solver, |i, j, c| {
            // Shifting every cost of one ordered pair raises F(0, 1) by 0.1 and leaves F(1, 0) alone.
            if asymmetric && (i, j) == (0, 1) {
                c.entries_mut().iter_mut().for_each(|e| *e += 0.1);
            }
        })?;
        let excess = r.violations.iter().map(|v| v.excess).fold(-IDENTITY_TOLERANCE, f64::max);
        rep.record(excess, || {
            let names: Vec<String> = r.violations.iter().map(|v| format!("{}: {}", v.identity, v.detail)).collect();
            format!("case {case}: {}", names.join("; "))
        });
    }
    Ok(rep)
}

fn shift_suite(config: &RunConfig, spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<SuiteReport, CliError> {
    let p = &config.check_props;
    let mut rep = SuiteReport::new(Suite::Shift, spec.family.name());
    for case in 0..p.shift_cases {
        let r = rng.gen_range(0..=p.shift_max_total);
        let s = rng.gen_range(0..=p.shift_max_total - r);
        let pts = random_points(spec, rng, 2, p.shift_n + p.shift_max_total);
        let c = shift_invariance_check(spec, &pts[0], &pts[1], r, s, p.shift_n, &config.solver)?;
        rep.record(c.difference - c.bound, || {
            format!("case {case} r={r} s={s}: |difference| {} > bound {}", c.difference, c.bound)
        });
    }
    Ok(rep)
}

fn partition_suite(config: &RunConfig, spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<Vec<SuiteReport>, CliError> {
    let p = &config.check_props;
    let mut out = Vec::new();
    for &variant in &p.partition_variants {
        let side = match variant {
            BoundVariant::Upper => "upper",
            BoundVariant::Lower => "lower",
        };
        let label = format!("{} ({side})", spec.family.name());
        let mut rep = SuiteReport::new(Suite::Partition, &label);
        let horizon = p.partition_schedule.max();
        let cfg = PartitionConfig {
            schedule: p.partition_schedule.clone(),
            tail_fraction: DEFAULT_TAIL_FRACTION,
            solver: config.solver,
            variant,
        };
        for case in 0..p.partition_pairs {
            let pts = random_points(spec, rng, 2, horizon);
            for &eps in &p.partition_epsilons {
                let r = prop34_check(spec, &pts[0], &pts[1], eps, &cfg)?;
                let target = match variant {
                    BoundVariant::Upper => r.estimate.fbar_hat,
                    BoundVariant::Lower => r.estimate.funder_hat,
                };
                // A pointwise failure along the tail fails the case even when the limit target is within bound.
                let mut excess = target - r.bound - r.slack;
                if !r.holds {
                    excess = excess.max(f64::MIN_POSITIVE);
                }
                rep.record(excess, || format!("case {case} eps={eps}: estimate {target} vs bound {} (+{})", r.bound, r.slack));
            }
        }
        out.push(rep);
    }
    Ok(out)
}

fn check_props(config: &RunConfig) -> Result<Outcome, CliError> {
    let p = &config.check_props;
    let mut rng = cli_rng(config.seed, 2);
    let mut reports = Vec::new();
    for suite in &p.suites {
        match suite {
            Suite::Oracle => reports.push(oracle_suite(config, &mut rng)?),
            Suite::OneD => reports.extend(one_d_suite(config, &mut rng)?),
            Suite::Triples => {
                for spec in systems(config)? {
                    reports.push(triples_suite(config, &spec, &mut rng)?);
                }
            }
            Suite::Shift => {
                for spec in systems(config)? {
                    reports.push(shift_suite(config, &spec, &mut rng)?);
                }
            }
            Suite::Partition => {
                for spec in systems(config)? {
                    reports.extend(partition_suite(config, &spec, &mut rng)?);
                }
            }
        }
    }
    let mut table = Table::new(&["suite", "system", "cases", "failures", "max_excess"]);
    for r in &reports {
        table.push(vec![
            Cell::from(to_value(&r.suite).as_str().unwrap_or("?").to_string()),
            Cell::from(r.system.clone()),
            Cell::from(r.cases),
            Cell::from(r.failures),
            Cell::from(r.max_excess),
        ]);
    }
    let failing: Vec<String> = reports
        .iter()
        .filter(|r| r.failures > 0)
        .map(|r| format!("{} on {}: {}", to_value(&r.suite).as_str().unwrap_or("?"), r.system, r.examples.first().cloned().unwrap_or_default()))
        .collect();
    let failure = (!failing.is_empty()).then(|| failing.join(" | "));
    Ok(Outcome { results: json!({ "suites": reports }), table, failure })
}

#[derive(Clone, Debug, Serialize)]
struct BenchRow {
    solver: &'static str,
    n: usize,
    seconds: f64,
    mean_cost: f64,
    gap_bound: f64,
    /// Mean cost minus an independently computed optimum, when available.
    observed_gap: Option<f64>,
}

fn timed<T>(repeats: usize, mut f: impl FnMut() -> Result<T, CliError>) -> Result<(T, f64), CliError> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let r = f()?;
        best = best.min(t.elapsed().as_secs_f64());
        out = Some(r);
    }
    Ok((out.expect("at least one repeat"), best))
}

fn bench(config: &RunConfig) -> Result<Outcome, CliError> {
    let p = &config.bench;
    let mut rng = cli_rng(config.seed, 3);
    let mut rows = Vec::new();
    let mut sample = |n: usize| -> (Vec<f64>, Vec<f64>) {
        ((0..n).map(|_| rng.gen()).collect(), (0..n).map(|_| rng.gen()).collect())
    };
    let circle_matrix = |xs: &[f64], ys: &[f64]| {
        let n = xs.len();
        CostMatrix::new(n, (0..n * n).map(|k| circle_distance(xs[k / n], ys[k % n])).collect())
    };
    const REFERENCE_MAX: usize = 512;

    for &n in &p.sorted {
        let (xs, ys) = sample(n);
        let (r, secs) = timed(p.repeats, || Ok(solve_sorted_line(&xs, &ys)?))?;
        let observed = if n <= REFERENCE_MAX {
            let c = CostMatrix::new(n, (0..n * n).map(|k| (xs[k / n] - ys[k % n]).abs()).collect())?;
            Some(r.mean_cost - solve_exact(&c).mean_cost)
        } else {
            None
        };
        rows.push(BenchRow { solver: "sorted", n, seconds: secs, mean_cost: r.mean_cost, gap_bound: r.gap_bound, observed_gap: observed });
    }
    for &n in &p.cyclic {
        let (xs, ys) = sample(n);
        let (r, secs) = timed(p.repeats, || Ok(solve_cyclic_circle(&xs, &ys)?))?;
        let observed = if n <= REFERENCE_MAX {
            Some(r.mean_cost - solve_exact(&circle_matrix(&xs, &ys)?).mean_cost)
        } else {
            None
        };
        rows.push(BenchRow { solver: "cyclic", n, seconds: secs, mean_cost: r.mean_cost, gap_bound: r.gap_bound, observed_gap: observed });
    }
    for &n in &p.exact {
        let (xs, ys) = sample(n);
        let c = circle_matrix(&xs, &ys)?;
        let (r, secs) = timed(p.repeats, || Ok(solve_exact(&c)))?;
        let reference = solve_cyclic_circle(&xs, &ys)?.mean_cost;
        rows.push(BenchRow { solver: "exact", n, seconds: secs, mean_cost: r.mean_cost, gap_bound: r.gap_bound, observed_gap: Some(r.mean_cost - reference) });
    }
    for &n in &p.entropic {
        let (xs, ys) = sample(n);
        let c = circle_matrix(&xs, &ys)?;
        let (r, secs) = timed(1, || Ok(solve_entropic(&c, &config.solver.entropic)?))?;
        let reference = solve_cyclic_circle(&xs, &ys)?.mean_cost;
        rows.push(BenchRow { solver: "entropic", n, seconds: secs, mean_cost: r.mean_cost, gap_bound: r.gap_bound, observed_gap: Some(r.mean_cost - reference) });
    }

    let mut table = Table::new(&["solver", "n", "seconds", "mean_cost", "gap_bound", "observed_gap"]);
    for r in &rows {
        table.push(vec![
            Cell::from(r.solver),
            Cell::from(r.n),
            Cell::from(r.seconds),
            Cell::from(r.mean_cost),
            Cell::from(r.gap_bound),
            Cell::from(r.observed_gap),
        ]);
    }
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| r.observed_gap.is_some_and(|g| g > r.gap_bound + 1e-9))
        .map(|r| format!("{} n={}: observed gap {:?} above bound {}", r.solver, r.n, r.observed_gap, r.gap_bound))
        .collect();
    let failure = (!violations.is_empty()).then(|| violations.join("; "));
    Ok(Outcome { results: json!({ "rows": rows }), table, failure })
}
