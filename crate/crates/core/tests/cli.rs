use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsc"))
        .args(args)
        .env_remove("QSC_RESTARTS")
        .output()
        .unwrap()
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn close(v: &Value, want: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() <= tol
}

#[test]
fn analyze_tetrahedral() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "t.json",
        r#"{"builtin":"tetrahedral","copies":1}"#,
    );
    let r = json(&qsc(&[
        "analyze",
        spec.to_str().unwrap(),
        "--format",
        "json",
    ]));
    assert!(close(&r["a_bits"], 1.0, 1e-9));
    assert!(close(&r["b_bits"], 0.415037, 1e-4));
    assert_eq!(r["classification"], "nontrivial");
    assert!(r.get("search_best_sum").is_none());
}

#[test]
fn analyze_pauli_two_copies() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(dir.path(), "p.json", r#"{"builtin":"pauli2","copies":2}"#);
    let r = json(&qsc(&[
        "analyze",
        spec.to_str().unwrap(),
        "--format",
        "json",
        "--search",
    ]));
    assert!(close(&r["a_bits"], 0.0, 1e-9));
    assert!(close(&r["b_bits"], 2.0, 1e-6));
    assert!(close(&r["margin"], 0.0, 1e-6));
    assert_eq!(r["classification"], "classical_equivalent");
    assert!(r["search_best_sum"].as_f64().unwrap() <= 1.0 + 1e-9);
}

#[test]
fn reducible_spec_is_a_validation_failure() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "r.json",
        r#"{"builtin":"reducible_demo","copies":1}"#,
    );
    let out = qsc(&["analyze", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("irreducib"));
}

#[test]
fn malformed_and_missing_specs() {
    let dir = TempDir::new().unwrap();
    let bad = write_spec(dir.path(), "bad.json", r#"{"builtin":"pauli2"}"#);
    assert_eq!(
        qsc(&["analyze", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("nope.json");
    assert_eq!(
        qsc(&["analyze", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn non_power_of_two_orbit_is_rejected() {
    // a generic fiducial has the full 12-element tetrahedral orbit
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "o.json",
        r#"{"builtin":{"name":"tetrahedral","fiducial":{"amplitudes":[[0.9,0],[0.3,0.2]]}},"copies":1}"#,
    );
    let out = qsc(&["analyze", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("orbit size"));
}

#[test]
fn attack_traces() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("tetrahedral", 4, 0.5, 2.0),
        ("quaternion", 2, 0.8, 1.6),
        ("pauli2", 2, 0.5, 1.0),
    ];
    for (name, count, each, sum) in cases {
        let body = format!(r#"{{"builtin":"{name}","copies":1}}"#);
        let spec = write_spec(dir.path(), &format!("{name}.json"), &body);
        let r = json(&qsc(&[
            "attack",
            spec.to_str().unwrap(),
            "--format",
            "json",
        ]));
        let per_x = r["per_x"].as_array().unwrap();
        assert_eq!(per_x.len(), count);
        assert!(per_x.iter().all(|e| close(&e["p"], each, 1e-9)), "{name}");
        assert!(close(&r["sum"], sum, 1e-9));
        assert!(close(&r["bound"], sum, 1e-9));
        assert!(close(&r["reduced_distance"], 0.0, 1e-12));
    }
}

#[test]
fn list_builtins() {
    let out = qsc(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["tetrahedral", "pauli2", "quaternion", "reducible_demo"] {
        assert!(text.contains(name));
    }
    let machine = qsc(&["list", "--format", "json"]);
    let v: Value = serde_json::from_slice(&machine.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    let raw = String::from_utf8(machine.stdout).unwrap();
    let first = raw.split('}').next().unwrap();
    let pos: Vec<usize> = ["\"name\"", "\"group_order\"", "\"dim\"", "\"irreducible\""]
        .iter()
        .map(|k| first.find(k).unwrap())
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(
        raw,
        String::from_utf8(qsc(&["list", "--format", "json"]).stdout).unwrap()
    );
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = qsc(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr)
        .to_lowercase()
        .contains("usage"));
    assert_eq!(qsc(&[]).status.code(), Some(64));
}

#[test]
fn reports_are_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "q.json",
        r#"{"builtin":"quaternion","copies":2,"restarts":8}"#,
    );
    let s = spec.to_str().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = qsc(&[
            "analyze",
            s,
            "--search",
            "--seed",
            "17",
            "--format",
            "json",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["seed"], 17);
}

#[test]
fn twelve_significant_digits() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "t.json",
        r#"{"builtin":"tetrahedral","copies":1}"#,
    );
    let out = qsc(&["analyze", spec.to_str().unwrap(), "--format", "json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"b_bits\": 0.415037499279,"), "{text}");
    assert!(text.contains("\"margin\": 0.584962500721,"));
}

#[test]
fn canon_round_trips() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "c.json",
        r#"{"copies":1,"custom":{"fiducial":{"amplitudes":[[1,0],[0,0]]},
            "generators":[[[[0,0],[1,0]],[[1,0],[0,0]]],[[[1,0],[0,0]],[[0,0],[-1,0]]]]}}"#,
    );
    let first = qsc(&["canon", spec.to_str().unwrap()]);
    assert!(first.status.success());
    let canon = write_spec(
        dir.path(),
        "c2.json",
        std::str::from_utf8(&first.stdout).unwrap(),
    );
    let second = qsc(&["canon", canon.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
    let r = json(&qsc(&[
        "analyze",
        canon.to_str().unwrap(),
        "--format",
        "json",
    ]));
    assert_eq!(r["classification"], "classical_equivalent");
}

#[test]
fn restart_env_override() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "t.json",
        r#"{"builtin":"tetrahedral","copies":1}"#,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_qsc"))
        .args(["analyze", spec.to_str().unwrap()])
        .env("QSC_RESTARTS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("QSC_RESTARTS"));
    let ok = Command::new(env!("CARGO_BIN_EXE_qsc"))
        .args(["analyze", spec.to_str().unwrap(), "--restarts", "2"])
        .env("QSC_RESTARTS", "zero")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
