//! End-to-end runs of the command-line binary.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochvertex")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn six_vertex_weight_at_zero_v() {
    let out = run(&["weights", "--family", "six-vertex", "--cfg", "1,0,0,1", "--x", "2", "--y", "1", "--q", "0.5", "--v", "0"]);
    assert!(out.status.success());
    let w = &json_of(&out)["weight"];
    assert_eq!(w[0].as_f64(), Some(0.6666666666666666));
    assert_eq!(w[1].as_f64(), Some(0.0));
}

#[test]
fn incoming_only_lists_a_stochastic_row() {
    let out = run(&["weights", "--family", "tetra-t", "--cfg", "0,2,0", "--v", "0.5"]);
    assert!(out.status.success());
    let j = json_of(&out);
    let probs: Vec<f64> = j["outgoing"].as_array().unwrap().iter().map(|r| r["weight"][0].as_f64().unwrap()).collect();
    assert_eq!(probs.len(), 3);
    assert!(probs.iter().any(|&p| (p - 0.5).abs() < 1e-15));
    assert!((j["total"][0].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn empty_tetrahedron_boundary_has_unit_sides() {
    let out = run(&["verify", "--equation", "tetra-nondyn", "--cap", "0", "--v", "0.3", "--w", "0.7"]);
    assert!(out.status.success());
    let j = json_of(&out);
    let r = &j["runs"][0];
    assert_eq!(r["lhs"][0].as_f64(), Some(1.0));
    assert_eq!(r["rhs"][0].as_f64(), Some(1.0));
    assert_eq!(j["summary"]["failed"].as_u64(), Some(0));
}

#[test]
fn verify_output_is_deterministic() {
    let args = ["verify", "--equation", "ybe-six-vertex-s", "--draws", "3", "--seed", "5"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pole_gives_structured_error() {
    let out = run(&["weights", "--family", "six-vertex", "--cfg", "1,0,0,1", "--x", "1", "--y", "2", "--q", "0.5", "--v", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "pole");
}

#[test]
fn failing_check_sets_exit_status() {
    let out = run(&["verify", "--equation", "stoch-six-vertex", "--tol=-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["summary"]["failed"].as_u64(), Some(1));
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(!run(&["weights", "--bogus"]).status.success());
    let out = run(&["verify", "--equation", "no-such-check"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "input");
    assert_eq!(run(&["weights", "--family", "six-vertex", "--cfg", "1,0,0", "--x", "1"]).status.code(), Some(2));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let path = std::env::temp_dir().join(format!("stochvertex-cli-config-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"family": "six-vertex", "cfg": [1, 0, 0, 1], "x": 5, "y": 1, "q": 0.5, "v": 0}"#).unwrap();
    let out = run(&["weights", "--config", path.to_str().unwrap(), "--x", "2"]);
    std::fs::remove_file(&path).unwrap();
    assert!(out.status.success());
    assert_eq!(json_of(&out)["weight"][0].as_f64(), Some(0.6666666666666666));
}

#[test]
fn complex_flags_are_accepted() {
    let out = run(&["weights", "--family", "six-vertex", "--cfg", "0,1", "--x", "1.2+0.3i", "--y", "0.5-0.1i", "--q", "0.4", "--v", "0.2i"]);
    assert!(out.status.success());
    assert!((json_of(&out)["total"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn lattice_sample_csv_is_reproducible() {
    let args = ["sample", "--family", "six-vertex", "--width", "5", "--height", "4", "--bottom", "1,0,1,1,0", "--left", "1", "--seed", "9"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("row,col,i1,j1,i2,j2\n"));
    assert_eq!(text.lines().count(), 21);
}
