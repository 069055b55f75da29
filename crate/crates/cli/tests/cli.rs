use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use negmono::{fixtures, PureState};
use serde_json::Value;
use tempfile::TempDir;

fn negmono(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_negmono")).args(args).output().expect("binary runs")
}

fn write_state(dir: &Path, name: &str, psi: &PureState) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, psi.to_json_value().to_string()).unwrap();
    path
}

fn json_out(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn bell_negativity_is_one() {
    let dir = TempDir::new().unwrap();
    let bell = write_state(dir.path(), "bell", &fixtures::bell());
    let v = json_out(&negmono(&["compute", "negativity", "--state", bell.to_str().unwrap(), "--cut", "0"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["command"], "compute negativity");
    assert!(v["config"].is_object() && v["diagnostics"].is_object());
}

#[test]
fn traced_counterexample_scren() {
    let dir = TempDir::new().unwrap();
    let path = write_state(dir.path(), "qutrit", &fixtures::qutrit_ckw_counterexample());
    let v = json_out(&negmono(&[
        "compute", "scren", "--state", path.to_str().unwrap(), "--cut", "0", "--trace-out", "2",
    ]));
    assert!((v["value"].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-3);
}

#[test]
fn cut_refers_to_original_indices() {
    let dir = TempDir::new().unwrap();
    let path = write_state(dir.path(), "qutrit", &fixtures::qutrit_ckw_counterexample());
    let v = json_out(&negmono(&[
        "compute", "tangle", "--state", path.to_str().unwrap(), "--cut", "2", "--trace-out", "1",
    ]));
    assert!((v["value"].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-3);
    let traced_cut = negmono(&["compute", "tangle", "--state", path.to_str().unwrap(), "--cut", "1", "--trace-out", "1"]);
    assert_eq!(traced_cut.status.code(), Some(2));
}

#[test]
fn ghz_residuals_are_one() {
    let dir = TempDir::new().unwrap();
    let path = write_state(dir.path(), "ghz3", &fixtures::ghz(3));
    for quantity in ["nscren", "ntangle"] {
        let v = json_out(&negmono(&["compute", quantity, "--state", path.to_str().unwrap(), "--focus", "0"]));
        assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-3);
        assert!(v["diagnostics"]["terms"].is_array());
    }
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dims":[2,2],"amplitudes":[[1,0]]}"#).unwrap();
    assert_eq!(negmono(&["compute", "negativity", "--state", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(negmono(&["compute", "negativity", "--state", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(negmono(&["compute", "bogus"]).status.code(), Some(2));
}

#[test]
fn oversized_states_hit_the_cost_guard() {
    let dir = TempDir::new().unwrap();
    let big = write_state(dir.path(), "ghz6", &fixtures::ghz(6));
    let out = negmono(&["compute", "nscren", "--state", big.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(negmono(&["hunt", "--dims", "17,17,17", "--samples", "1"]).status.code(), Some(3));
}

#[test]
fn verify_paper_is_deterministic() {
    let a = negmono(&["verify", "paper", "--seed", "7"]);
    let b = negmono(&["verify", "paper", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["failed"], serde_json::json!([]));
}

#[test]
fn verify_wclass_passes() {
    let out = negmono(&["verify", "wclass", "--trials", "20", "--n", "4", "--d", "3", "--seed", "7"]);
    let v = json_out(&out);
    assert_eq!(v["checks"].as_array().unwrap().len(), 20);
    assert_eq!(v["pass"], true);
}

#[test]
fn hunt_three_qubits_finds_nothing() {
    let v = json_out(&negmono(&["hunt", "--dims", "2,2,2", "--samples", "100", "--seed", "1"]));
    assert!(v["min_residual"].as_f64().unwrap() >= -1e-4);
    assert_eq!(v["flagged"], serde_json::json!([]));
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().enumerate().all(|(i, r)| r["index"] == i));
}

#[test]
fn hunt_qutrit_scren_finds_nothing() {
    let v = json_out(&negmono(&["hunt", "--dims", "3,2,2", "--samples", "100", "--seed", "2"]));
    assert!(v["min_residual"].as_f64().unwrap() >= -1e-4);
}

#[test]
fn hunt_tangle_flags_the_fixture() {
    let v = json_out(&negmono(&["hunt", "--dims", "3,2,2", "--samples", "100", "--measure", "tangle"]));
    let flagged = v["flagged"].as_array().unwrap();
    let fixture = flagged.iter().find(|f| f["source"] == "fixture:counterexample322").expect("fixture flagged");
    assert!((fixture["residual"].as_f64().unwrap() + 4.0 / 9.0).abs() < 2e-3);
    assert!(fixture["state"]["amplitudes"].is_array());
}

#[test]
fn hunt_csv_to_file_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for path in [&first, &second] {
        let out = negmono(&[
            "hunt", "--dims", "2,2,2", "--samples", "20", "--seed", "5", "--csv", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let text = std::fs::read_to_string(&first).unwrap();
    assert_eq!(text, std::fs::read_to_string(&second).unwrap());
    assert!(text.starts_with("index,source,residual,flagged\n"));
    // two fixtures share the qubit dims, plus 20 samples
    assert_eq!(text.lines().count(), 1 + 2 + 20);
}
