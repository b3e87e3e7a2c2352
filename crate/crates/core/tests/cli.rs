//! The binary end to end on small inputs.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mkdv-ut");

fn run(args: &[&str], cfg: &Path) -> Output {
    Command::new(BIN).args(args).arg("--config").arg(cfg).output().unwrap()
}

fn config(dir: &Path, body: &str) -> std::path::PathBuf {
    let d = dir.display();
    let files = format!(
        r#""files": {{"spectral_x": "{d}/x.json", "spectral_t": "{d}/t.json", "spectral": "{d}/s.json",
           "solution": "{d}/u.csv", "report": "{d}/report.json", "tables": "{d}/tables.csv"}}"#
    );
    let p = dir.join("cfg.json");
    std::fs::write(&p, format!("{{{body}, {files}}}")).unwrap();
    p
}

fn pipeline(cfg: &Path, solve_args: &[&str]) -> Output {
    for stage in ["spectral-x", "spectral-t", "derive"] {
        let o = run(&[stage], cfg);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let mut a = vec!["solve"];
    a.extend_from_slice(solve_args);
    run(&a, cfg)
}

const SMALL_GRID: &str = r#""grid": {"panels_per_ray": 6, "nodes_per_panel": 16, "R_max": 30, "grading": 1.8}"#;

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"lambda\": -1, ").unwrap();
    let o = run(&["spectral-x"], &p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config"));
    std::fs::write(&p, r#"{"lambda": 2}"#).unwrap();
    assert_eq!(run(&["spectral-x"], &p).status.code(), Some(2));
    std::fs::write(&p, r#"{"lambda": 1, "bogus": 0}"#).unwrap();
    assert_eq!(run(&["spectral-x"], &p).status.code(), Some(2));
    let cfg = config(dir.path(), r#""lambda": 1"#);
    assert_eq!(run(&["validate", "--suite", "nope"], &cfg).status.code(), Some(2));
}

#[test]
fn zero_data_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let z = r#"{"kind": "preset", "name": "zero"}"#;
    let body = format!(
        r#""lambda": 1, "initial": {{"profile": {z}, "L": 5}}, "boundary": {{"g0": {z}, "g1": {z}, "g2": {z}, "T": 5}},
           {SMALL_GRID}, "solve": {{"x": {{"from": 0, "to": 1, "n": 3}}, "t": {{"from": 0, "to": 1, "n": 2}}}}"#
    );
    let cfg = config(dir.path(), &body);
    let o = pipeline(&cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(dir.path().join("u.csv")).unwrap();
    let mut n = 0;
    for r in rd.records() {
        let r = r.unwrap();
        for col in 2..5 {
            assert_eq!(r[col].parse::<f64>().unwrap(), 0.0);
        }
        n += 1;
    }
    assert_eq!(n, 6);
    let o = run(&["emit"], &cfg);
    assert!(o.status.success());
    let tables = std::fs::read_to_string(dir.path().join("tables.csv")).unwrap();
    assert_eq!(tables.lines().count(), 1 + 6 * 6 * 16);
}

#[test]
fn gate_force_determinism_and_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let z = r#"{"kind": "preset", "name": "zero"}"#;
    let g = r#"{"kind": "preset", "name": "gaussian", "params": {"alpha": 0.5, "beta": 1, "x0": 0}}"#;
    let body = format!(
        r#""lambda": -1, "initial": {{"profile": {g}, "L": 10}}, "boundary": {{"g0": {z}, "g1": {z}, "g2": {z}, "T": 5}},
           {SMALL_GRID}, "derive": {{"h_fit": false, "zero_scan": null}},
           "solve": {{"x": {{"from": 0.5, "to": 1, "n": 2}}, "t": {{"from": 0.1, "to": 0.2, "n": 2}}, "derivatives": false}}"#
    );
    let cfg = config(dir.path(), &body);
    let o = pipeline(&cfg, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("global relation"));
    let one = run(&["solve", "--force", "--workers", "1"], &cfg);
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    let a = std::fs::read(dir.path().join("u.csv")).unwrap();
    let two = run(&["solve", "--force", "--workers", "2"], &cfg);
    assert!(two.status.success());
    assert_eq!(a, std::fs::read(dir.path().join("u.csv")).unwrap());

    let s = std::fs::read_to_string(dir.path().join("s.json")).unwrap();
    let sd: mkdv_ut::spectral::SpectralData = serde_json::from_str(&s).unwrap();
    assert_eq!(serde_json::to_string_pretty(&sd).unwrap(), s);
}
