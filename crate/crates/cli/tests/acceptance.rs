//! Acceptance suite: eight criteria, one pass/fail line each.
//!
//! Criteria 1 to 6 and 8 come from a single `selftest` run; criterion 7 drives the
//! sampler through `sample`. The process exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde_json::Value;
use stochvertex::sampler::{check_height_field, HeightField, LatticeDomain, LatticeModel};
use stochvertex::special_fn::EllipticContext;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochvertex")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("stochvertex-acceptance-{}-{name}", std::process::id()))
}

struct Outcome {
    passed: bool,
    detail: String,
}

/// Groups selftest runs by check name: (runs, failed, worst relative residual).
fn by_check(runs: &[Value]) -> BTreeMap<String, (usize, usize, f64)> {
    let mut m = BTreeMap::new();
    for r in runs {
        let e = m.entry(r["equation"].as_str().unwrap().to_string()).or_insert((0, 0, 0.0f64));
        e.0 += 1;
        e.1 += usize::from(!r["passed"].as_bool().unwrap());
        e.2 = e.2.max(r["residual_rel"].as_f64().unwrap_or(f64::INFINITY));
    }
    m
}

/// Passes when every listed check ran at least `min_runs` times without a failure.
fn group(stats: &BTreeMap<String, (usize, usize, f64)>, checks: &[(&str, usize)]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, min_runs) in checks {
        let (runs, failed, worst) = stats.get(*name).copied().unwrap_or((0, 0, f64::NAN));
        let ok = runs >= *min_runs && failed == 0;
        passed &= ok;
        parts.push(format!("{name} {}/{runs} worst {worst:.1e}", runs - failed));
    }
    Outcome { passed, detail: parts.join("; ") }
}

/// Single-vertex draws against exact probabilities: 3σ per outcome and chi-square at 0.001.
fn vertex_stats(args: &[&str]) -> Result<String, String> {
    let mut full = vec!["sample", "--vertex", "--draws", "100000"];
    full.extend_from_slice(args);
    let out = run(&full);
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stdout)));
    }
    let j: Value = serde_json::from_slice(&out.stdout).unwrap();
    let n = j["draws"].as_f64().unwrap();
    for o in j["outcomes"].as_array().unwrap() {
        let (p, f) = (o["probability"].as_f64().unwrap(), o["frequency"].as_f64().unwrap());
        let sigma = (p * (1.0 - p) / n).sqrt();
        if (f - p).abs() > 3.0 * sigma + 1e-12 {
            return Err(format!("{args:?}: outcome {} frequency {f} vs {p}", o["outgoing"]));
        }
    }
    let pv = j["chi_square"]["p_value"].as_f64().unwrap();
    if pv < 0.001 {
        return Err(format!("{args:?}: chi-square p = {pv}"));
    }
    Ok(format!("p={pv:.3}"))
}

fn lattice_check(model: &LatticeModel, domain: &LatticeDomain, args: &[&str]) -> Result<(), String> {
    let path = scratch("lattice.json");
    let p = path.to_str().unwrap();
    let mut full = vec!["sample", "--format", "json", "--seed", "2024", "--out", p];
    full.extend_from_slice(args);
    let out = run(&full);
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stdout)));
    }
    let first = std::fs::read(&path).unwrap();
    run(&full);
    let second = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    if first != second {
        return Err(format!("{args:?}: outputs differ between identical runs"));
    }
    let field: HeightField = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
    check_height_field(model, domain, &field).map_err(|e| format!("{args:?}: {e}"))
}

fn tetra_box_check() -> Result<(), String> {
    let args = ["sample", "--family", "tetra-t", "--width", "3", "--height", "3", "--depth", "3", "--face1", "1", "--face2", "2", "--face3", "0", "--v", "0.4", "--seed", "3"];
    let (a, b) = (run(&args), run(&args));
    if !a.status.success() || a.stdout != b.stdout {
        return Err("tetra-t box sampling is not reproducible".into());
    }
    let text = String::from_utf8(a.stdout).unwrap();
    for line in text.lines().skip(1) {
        let k: Vec<i64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        let (n1, n2, n3, m1, m2, m3) = (k[3], k[4], k[5], k[6], k[7], k[8]);
        if n1 + n2 != m1 + m2 || n2 + n3 != m2 + m3 || m2 > n2 {
            return Err(format!("conservation fails in box row `{line}`"));
        }
    }
    Ok(())
}

fn sampler_criterion() -> Outcome {
    let mut errors = Vec::new();
    let mut cases = 0;
    for inc in ["0,0", "0,1", "1,0", "1,1"] {
        cases += 1;
        if let Err(e) = vertex_stats(&["--family", "six-vertex", "--cfg", inc, "--seed", "11"]) {
            errors.push(e);
        }
    }
    for a in 0..=2 {
        for b in 0..=2 {
            cases += 1;
            let inc = format!("{a},{b}");
            if let Err(e) = vertex_stats(&["--family", "rank", "--n", "2", "--cfg", &inc, "--seed", "12"]) {
                errors.push(e);
            }
        }
    }
    for (inc, v) in [("0,2,0", "0.5"), ("1,3,2", "0.3")] {
        cases += 1;
        if let Err(e) = vertex_stats(&["--family", "tetra-t", "--cfg", inc, "--v", v, "--seed", "13"]) {
            errors.push(e);
        }
    }

    let c = |r: f64| C64::new(r, 0.0);
    let six = LatticeModel::SixVertex { x: c(1.7), y: c(0.6), q: c(0.35) };
    let d6 = LatticeDomain { width: 8, height: 6, bottom: vec![1, 0, 1, 1, 0, 1, 0, 1], left: vec![1; 6], lambda0: c(0.3), v0: c(0.2) };
    let rank = LatticeModel::RankColored { n: 2, x: c(1.5), y: c(0.5), q: c(0.4) };
    let dr = LatticeDomain { width: 6, height: 5, bottom: vec![1, 2, 0, 2, 1, 0], left: vec![2, 1, 0, 1, 2], lambda0: c(0.3), v0: c(0.3) };
    let ctx = EllipticContext::new(C64::new(0.0, 1.1), c(0.05)).unwrap();
    let ell = LatticeModel::Elliptic { spin_j: 1, spin_lambda: 1, x: c(0.1), y: c(0.3), ctx };
    let de = LatticeDomain { width: 4, height: 4, bottom: vec![1, 0, 1, 0], left: vec![1, 0, 1, 1], lambda0: c(0.3), v0: c(0.6) };
    let lattices: [(&LatticeModel, &LatticeDomain, Vec<&str>); 3] = [
        (&six, &d6, vec!["--family", "six-vertex", "--width", "8", "--height", "6", "--bottom", "1,0,1,1,0,1,0,1", "--left", "1"]),
        (&rank, &dr, vec!["--family", "rank", "--n", "2", "--width", "6", "--height", "5", "--bottom", "1,2,0,2,1,0", "--left", "2,1,0,1,2"]),
        (&ell, &de, vec!["--family", "elliptic", "--width", "4", "--height", "4", "--bottom", "1,0,1,0", "--left", "1,0,1,1"]),
    ];
    for (m, d, args) in lattices {
        cases += 1;
        if let Err(e) = lattice_check(m, d, &args) {
            errors.push(e);
        }
    }
    cases += 1;
    if let Err(e) = tetra_box_check() {
        errors.push(e);
    }
    let detail = if errors.is_empty() {
        format!("{cases} sampler cases (15 vertex distributions at N = 1e5, 3 lattices, 1 box)")
    } else {
        errors.join("; ")
    };
    Outcome { passed: errors.is_empty(), detail }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs_path = scratch("selftest.json");
    let out = run(&["selftest", "--seed", "42", "--out", runs_path.to_str().unwrap()]);
    let runs_json: Value = serde_json::from_slice(&std::fs::read(&runs_path).expect("selftest writes its runs")).unwrap();
    std::fs::remove_file(&runs_path).ok();
    let summary: Value = serde_json::from_slice(&out.stdout).expect("selftest prints a JSON summary");
    let stats = by_check(runs_json["runs"].as_array().unwrap());

    let mut results: Vec<(&str, Outcome)> = vec![
        (
            "special-function identities",
            group(&stats, &[("theta-quartic", 100), ("poch-merge", 100), ("vandermonde-chu", 100), ("q-heine", 100), ("elliptic-jackson", 100)]),
        ),
        (
            "stochasticity",
            group(
                &stats,
                &[("stoch-six-vertex", 100), ("stoch-elliptic", 225), ("stoch-rank", 200), ("stoch-tetra-s", 25), ("stoch-tetra-t", 25)],
            ),
        ),
        (
            "Yang-Baxter equations",
            group(
                &stats,
                &[
                    ("ybe-six-vertex-w", 1),
                    ("ybe-six-vertex-chi", 1),
                    ("ybe-six-vertex-s", 1),
                    ("ybe-elliptic-s", 8),
                    ("ybe-rank-u", 5),
                    ("ybe-rank-w", 5),
                    ("ybe-rank-s", 2),
                ],
            ),
        ),
        ("tetrahedron equations", group(&stats, &[("tetra-plain", 10), ("tetra-dynamical", 10), ("tetra-nondyn", 10)])),
        (
            "cross-validation oracles",
            group(
                &stats,
                &[
                    ("correction-elliptic", 30),
                    ("correction-rank", 30),
                    ("correction-tetra", 30),
                    ("elliptic-frozen", 1),
                    ("rank-l1-closed-form", 1),
                    ("rank-m1-table", 1),
                    ("rank-n1-reduction", 1),
                    ("six-vertex-v0", 1),
                ],
            ),
        ),
        ("degeneration limits", group(&stats, &[("tetra-q1", 1), ("elliptic-trig-limit", 1)])),
        ("sampler statistics", sampler_criterion()),
    ];
    let failed = summary["summary"]["failed"].as_u64();
    results.push((
        "selftest exits 0",
        Outcome {
            passed: out.status.success() && failed == Some(0),
            detail: format!("status {:?}, {} runs, {failed:?} failed", out.status.code(), summary["summary"]["total"]),
        },
    ));

    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.passed;
        println!("criterion {} {name}: {} ({})", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance finished in {:.1?}", start.elapsed());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
