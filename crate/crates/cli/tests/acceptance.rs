//! Acceptance gate. Runs each documented experiment through its preset,
//! checks the stated thresholds and time limits, and prints one line per
//! criterion. Runs without the test harness so the lines always reach stdout
//! and criteria run one after another (timings are not shared with other
//! tests).

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use orbdist::config::{Command, Overrides};
use orbdist::{Invocation, RunOutput};
use serde_json::Value;

struct Gate {
    /// Payload of every preset run, for the determinism re-run.
    payloads: BTreeMap<&'static str, (Command, String)>,
    lines: Vec<(usize, bool, String)>,
}

fn invocation(command: Command, preset: &str) -> Invocation {
    Invocation { command, preset: Some(preset.into()), config: None, out: None, overrides: Overrides::default() }
}

fn payload(out: &RunOutput) -> String {
    serde_json::to_string(&out.report.payload()).unwrap()
}

impl Gate {
    fn run(&mut self, command: Command, preset: &'static str) -> Result<(Value, Duration, bool), String> {
        let start = Instant::now();
        let out = orbdist::run(&invocation(command, preset)).map_err(|e| format!("{preset}: {e}"))?;
        let elapsed = start.elapsed();
        self.payloads.insert(preset, (command, payload(&out)));
        Ok((out.report.results.clone(), elapsed, out.failed()))
    }

    fn record(&mut self, id: usize, name: &str, verdict: Result<String, String>) {
        let (ok, detail) = match verdict {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let line = format!("criterion {id:>2} {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((id, ok, line));
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn suites<'a>(results: &'a Value, suite: &str) -> Vec<&'a Value> {
    results["suites"].as_array().unwrap().iter().filter(|s| s["suite"] == suite).collect()
}

/// Every suite row passed and has the expected case count.
fn suite_clean(rows: &[&Value], cases: u64) -> Result<String, String> {
    ensure(!rows.is_empty(), "no suite rows")?;
    for r in rows {
        ensure(r["cases"].as_u64() == Some(cases), format!("{}: {} cases, expected {cases}", r["system"], r["cases"]))?;
        ensure(r["failures"].as_u64() == Some(0), format!("{}: {} failures, first {}", r["system"], r["failures"], r["examples"][0]))?;
    }
    let worst = rows.iter().map(|r| f(&r["max_excess"])).fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("{} suites x {cases} cases clean, worst excess {worst:.3e}", rows.len()))
}

fn c1_c2(g: &mut Gate) {
    let res = g.run(Command::CheckProps, "oracle-suite");
    let (r1, r2) = match &res {
        Err(e) => (Err(e.clone()), Err(e.clone())),
        Ok((results, t, _)) => {
            let r1 = within(*t, 10.0).and_then(|_| {
                let rows = suites(results, "oracle");
                suite_clean(&rows, 200)
            });
            let r2 = within(*t, 30.0).and_then(|_| {
                let rows = suites(results, "one-d");
                ensure(rows.len() == 2, "expected interval and circle rows")?;
                suite_clean(&rows, 50)
            });
            (r1.map(|d| format!("{d}, {:.1} s", t.as_secs_f64())), r2)
        }
    };
    g.record(1, "exact solver vs enumeration", r1);
    g.record(2, "1-D solvers vs exact", r2);
}

fn c3(g: &mut Gate) -> Result<String, String> {
    let (results, t, _) = g.run(Command::CheckProps, "prop31-suite")?;
    within(t, 60.0)?;
    let rows = suites(&results, "triples");
    ensure(rows.len() == 5, format!("expected 5 families, got {}", rows.len()))?;
    suite_clean(&rows, 100)
}

fn c4(g: &mut Gate) -> Result<String, String> {
    let (results, t, _) = g.run(Command::CheckProps, "prop32-suite")?;
    within(t, 60.0)?;
    suite_clean(&suites(&results, "shift"), 50)
}

fn pair_values(results: &Value) -> Vec<Vec<f64>> {
    results["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["values"].as_array().unwrap().iter().map(f).collect())
        .collect()
}

fn c5(g: &mut Gate) -> Result<String, String> {
    let (results, t, failed) = g.run(Command::Probe, "thm13-rotation")?;
    within(t, 30.0)?;
    let values = pair_values(&results);
    ensure(values.len() == 20, format!("{} pairs", values.len()))?;
    let max_last = values.iter().map(|v| *v.last().unwrap()).fold(0.0, f64::max);
    ensure(max_last <= 0.01, format!("max F_4096 = {max_last}"))?;
    ensure(results["verdict"]["status"] == "holds" && !failed, format!("verdict {}", results["verdict"]["status"]))?;
    Ok(format!("max F_4096 = {max_last:.3e}, holds, {:.1} s", t.as_secs_f64()))
}

fn c6(g: &mut Gate) -> Result<String, String> {
    let (results, t, failed) = g.run(Command::Probe, "thm13-doubling")?;
    within(t, 120.0)?;
    ensure(results["verdict"]["status"] == "fails" && failed, format!("verdict {}", results["verdict"]["status"]))?;
    let w = &results["witness"];
    ensure(w["x"] == "0", format!("witness x = {}", w["x"]))?;
    let last = *w["values"].as_array().unwrap().iter().map(f).collect::<Vec<_>>().last().unwrap();
    ensure((0.22..=0.28).contains(&last), format!("F_4096 = {last}"))?;
    Ok(format!("F_4096(0, y) = {last:.4}, fails with witness at 0, {:.1} s", t.as_secs_f64()))
}

fn c7(g: &mut Gate) -> Result<String, String> {
    let (results, t, _) = g.run(Command::ScanWme, "s1-wme")?;
    within(t, 60.0)?;
    let pairs = results["random_pairs"].as_array().unwrap();
    ensure(pairs.len() == 20, format!("{} random pairs", pairs.len()))?;
    ensure(results["scan"]["n"] == 2048, "scan length is not 2048")?;
    let max = pairs.iter().map(|p| f(&p["f_n"])).fold(0.0, f64::max);
    ensure(max <= 0.05, format!("max F_2048 = {max}"))?;
    let c = &results["contrast_pairs"][0];
    ensure(c["x"] == "0", "contrast pair does not start at 0")?;
    let gap = f(&c["mean_gap"]);
    ensure(gap >= 0.1, format!("mean gap {gap}"))?;
    Ok(format!("max F_2048 = {max:.3e}, mean_gap(0, 1e-4) = {gap:.4}, {:.1} s", t.as_secs_f64()))
}

fn c8(g: &mut Gate) -> Result<String, String> {
    let (results, t, _) = g.run(Command::CheckProps, "prop34-suite")?;
    within(t, 60.0)?;
    let config = &orbdist::presets::preset("prop34-suite").unwrap().check_props;
    ensure(config.partition_schedule.max() == 4096, "schedule does not reach 4096")?;
    ensure(config.partition_epsilons == [0.1, 0.05], "epsilons differ from {0.1, 0.05}")?;
    let rows = suites(&results, "partition");
    ensure(rows.len() == 4, format!("{} rows, expected rotation and paper-s1 with both bounds", rows.len()))?;
    let cases = config.partition_pairs as u64 * 2;
    suite_clean(&rows, cases)
}

fn moduli(scan: &Value) -> Vec<f64> {
    scan["rows"].as_array().unwrap().iter().map(|r| f(&r["modulus"])).collect()
}

fn c9(g: &mut Gate) -> Result<String, String> {
    let (s1, t1, _) = g.run(Command::ScanTa, "thm15-s1")?;
    let (dbl, t2, _) = g.run(Command::ScanTa, "thm15-doubling")?;
    within(t1 + t2, 120.0)?;
    let coord = s1["scans"].as_array().unwrap().iter().find(|s| s["observable"] == "coordinate").ok_or("no coordinate scan")?;
    let deltas: Vec<f64> = coord["rows"].as_array().unwrap().iter().map(|r| f(&r["delta"])).collect();
    ensure(deltas == [0.1, 0.05, 0.01], format!("deltas {deltas:?}"))?;
    let m = moduli(coord);
    ensure(m.windows(2).all(|w| w[1] <= w[0]), format!("s1 modulus increases: {m:?}"))?;
    ensure(*m.last().unwrap() <= 0.05, format!("s1 modulus at 0.01 is {}", m.last().unwrap()))?;
    let d = moduli(&dbl["scans"][0]);
    ensure(d.iter().all(|&v| v >= 0.4), format!("doubling modulus {d:?}"))?;
    let grid_has_zero = dbl["scans"][0]["rows"][0]["worst_pair"][0] == "0";
    ensure(grid_has_zero, "doubling worst pair does not involve 0")?;
    Ok(format!("s1 moduli {m:?}, doubling moduli {d:.3?}, {:.1} s", (t1 + t2).as_secs_f64()))
}

fn c10(g: &mut Gate) -> Result<String, String> {
    let (atoms, t1, _) = g.run(Command::Probe, "ergodicity-atoms")?;
    let (dbl, t2, _) = g.run(Command::Probe, "ergodicity-doubling")?;
    within(t1 + t2, 120.0)?;
    let pairs = atoms["pairs"].as_array().unwrap().len();
    ensure(pairs == 400, format!("{pairs} atom pairs"))?;
    let a = f(&atoms["nf_fraction"]);
    ensure((a - 0.5).abs() <= 0.05, format!("two-atom nf-fraction {a}"))?;
    let d = f(&dbl["nf_fraction"]);
    ensure(d >= 0.9, format!("doubling nf-fraction {d}"))?;
    let abst = dbl.get("abstention_rate").map(f).ok_or("abstention rate not reported")?;
    Ok(format!("two-atom {a:.4}, doubling {d:.3} (abstention {abst:.3}), {:.1} s", (t1 + t2).as_secs_f64()))
}

fn c11(g: &mut Gate) -> Result<String, String> {
    let (results, _, failed) = g.run(Command::Bench, "bench")?;
    let rows = results["rows"].as_array().unwrap();
    let find = |solver: &str, n: u64| rows.iter().find(|r| r["solver"] == solver && r["n"] == n);
    let sorted = find("sorted", 1_000_000).ok_or("no sorted n = 1e6 row")?;
    let exact = find("exact", 512).ok_or("no exact n = 512 row")?;
    let (ts, te) = (f(&sorted["seconds"]), f(&exact["seconds"]));
    ensure(ts < 1.0, format!("sorted 1e6 took {ts} s"))?;
    ensure(te < 5.0, format!("exact 512 took {te} s"))?;
    let entropic: Vec<&Value> = rows.iter().filter(|r| r["solver"] == "entropic").collect();
    ensure(!entropic.is_empty(), "no entropic rows")?;
    for r in &entropic {
        let (gap, bound) = (f(&r["observed_gap"]), f(&r["gap_bound"]));
        ensure(gap <= bound, format!("entropic n = {}: observed gap {gap} > bound {bound}", r["n"]))?;
    }
    ensure(!failed, "bench flagged a gap above its bound")?;
    Ok(format!("sorted 1e6 {ts:.3} s, exact 512 {te:.3} s, {} entropic gaps within bound", entropic.len()))
}

fn c12(g: &mut Gate) -> Result<String, String> {
    // Presets not exercised above.
    g.run(Command::Probe, "physical-s1")?;
    g.run(Command::Probe, "physical-identity")?;
    g.run(Command::Probe, "physical-doubling")?;
    let first = g.payloads.clone();
    for (preset, (command, before)) in &first {
        let out = orbdist::run(&invocation(*command, preset)).map_err(|e| format!("{preset}: {e}"))?;
        ensure(&payload(&out) == before, format!("{preset}: payload differs on re-run"))?;
    }
    Ok(format!("{} presets byte-identical on re-run", first.len()))
}

fn main() -> ExitCode {
    let mut g = Gate { payloads: BTreeMap::new(), lines: Vec::new() };
    c1_c2(&mut g);
    let r = c3(&mut g);
    g.record(3, "symmetry and triangle identities", r);
    let r = c4(&mut g);
    g.record(4, "shifted-window bound", r);
    let r = c5(&mut g);
    g.record(5, "rotation uniquely ergodic", r);
    let r = c6(&mut g);
    g.record(6, "doubling not uniquely ergodic", r);
    let r = c7(&mut g);
    g.record(7, "circle example weak mean equicontinuity", r);
    let r = c8(&mut g);
    g.record(8, "partition bounds", r);
    let r = c9(&mut g);
    g.record(9, "time-average continuity scans", r);
    let r = c10(&mut g);
    g.record(10, "ergodicity probe calibration", r);
    let r = c11(&mut g);
    g.record(11, "performance floor", r);
    let r = c12(&mut g);
    g.record(12, "determinism", r);

    let failed: Vec<usize> = g.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", g.lines.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
