use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn redspec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redspec"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn redspec")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn synth_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = redspec(dir.path(), &["synth", "exp_i1", "--tmax", "50", "--dt", "0.1", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("t,re0,im0"));
    assert_eq!(csv.lines().count(), 502);
    let side = read_json(&dir.path().join("s.json"));
    assert_eq!(side["domain"], "HalfLine");
    assert!(side["expectations"].is_array());
}

#[test]
fn analyze_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(redspec(d, &["synth", "exp_i1", "--out", "e.csv"]).status.success());
    for out in ["a.json", "b.json"] {
        let o = redspec(d, &["analyze", "e.csv", "--kind", "laplace", "--grid=-2:2:0.25", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(d.join("a.json")).unwrap();
    let b = std::fs::read(d.join("b.json")).unwrap();
    assert_eq!(a, b);
    assert!(d.join("a.plot.csv").exists());

    let v: Value = serde_json::from_slice(&a).unwrap();
    let status = v["status"].as_array().unwrap();
    assert_eq!(status.len(), 17);
    // the pole at 1 sits on index 12
    assert_eq!(status[12], "Singular");
    assert_eq!(status[0], "Regular");
}

#[test]
fn analyze_beurling_of_zero_is_all_regular() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(redspec(d, &["synth", "zero", "--tmax", "100", "--dt", "0.05", "--out", "z.csv"]).status.success());
    let o = redspec(d, &["analyze", "z.csv", "--kind", "beurling", "--grid=-2:2:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["status"].as_array().unwrap().iter().all(|s| s == "Regular"));
}

#[test]
fn reduced_on_exponential_needs_family_d() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(redspec(d, &["synth", "expgrow", "--out", "g.csv"]).status.success());
    let ok = redspec(d, &["analyze", "g.csv", "--kind", "reduced", "--class", "c0", "--grid=0:2:1"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = redspec(
        d,
        &["analyze", "g.csv", "--kind", "reduced", "--class", "c0", "--family", "s", "--grid=0:2:1"],
    );
    assert_eq!(bad.status.code(), Some(2));
    let missing = redspec(d, &["analyze", "g.csv", "--kind", "reduced"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.csv"), "t,re0,im0\n0,1,0\n0.1,1,0\n0.3,1\n").unwrap();
    assert_eq!(redspec(d, &["analyze", "bad.csv", "--kind", "laplace"]).status.code(), Some(2));
    assert_eq!(redspec(d, &["analyze", "nope.csv", "--kind", "laplace"]).status.code(), Some(2));
    assert_eq!(redspec(d, &["synth", "nope"]).status.code(), Some(2));

    std::fs::create_dir(d.join("corp")).unwrap();
    std::fs::copy(d.join("bad.csv"), d.join("corp/bad.csv")).unwrap();
    assert_eq!(redspec(d, &["verify", "corp"]).status.code(), Some(2));

    std::fs::write(d.join("cfg.json"), r#"{"tol_c9": 1}"#).unwrap();
    assert!(redspec(d, &["synth", "zero", "--tmax", "10", "--out", "z.csv"]).status.success());
    let o = redspec(d, &["analyze", "z.csv", "--kind", "laplace", "--config", "cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tol_c9"));

    std::fs::write(d.join("neg.json"), r#"{"tol_c0": -1}"#).unwrap();
    let o = redspec(d, &["analyze", "z.csv", "--kind", "laplace", "--config", "neg.json"]);
    assert_eq!(o.status.code(), Some(2));

    let o = redspec(d, &["verify", "--builtin", "--only", "no-such-check"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_corpus_dir_runs_selected_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::create_dir(d.join("corp")).unwrap();
    for name in ["exp_i0", "sinc"] {
        let out = format!("corp/{name}.csv");
        assert!(redspec(d, &["synth", name, "--out", &out]).status.success());
    }
    let o = redspec(
        d,
        &["verify", "corp", "--only", "regular-ft", "--grid=-3:3:0.5", "--out", "r.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&d.join("r.json"));
    let rows = v.as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["theorem"] == "regular-ft"));
    assert!(rows.iter().all(|r| r["status"] != "Fail"));
}

#[test]
fn verify_builtin_coarse_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = redspec(dir.path(), &["verify", "--builtin", "--grid=-5:5:0.5", "--out", "v.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&dir.path().join("v.json"));
    let rows = v.as_array().unwrap();
    let pass = rows.iter().filter(|r| r["status"] == "Pass").count();
    let fail = rows.iter().filter(|r| r["status"] == "Fail").count();
    assert_eq!(fail, 0);
    assert!(pass >= 40, "only {pass} passes");
}
