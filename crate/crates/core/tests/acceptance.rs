//! Acceptance criteria 1-12, one line each. ACCEPTANCE_ONLY=3,7 runs a subset.

use mkdv_ut::cli::validate::{criterion, NAMES};
use std::process::Command;

/// The negative control must also be refused by the binary itself.
fn gate_exit_code(dir: &std::path::Path) -> Result<i32, String> {
    let cfg = dir.join("neg.json");
    let files = format!(
        r#""files": {{"spectral_x": "{d}/x.json", "spectral_t": "{d}/t.json", "spectral": "{d}/s.json", "solution": "{d}/u.csv"}}"#,
        d = dir.display()
    );
    let text = format!(
        r#"{{"lambda": -1,
  "initial": {{"profile": {{"kind": "preset", "name": "gaussian", "params": {{"alpha": 1, "beta": 1, "x0": 0}}}}, "L": 12}},
  "boundary": {{"g0": {{"kind": "preset", "name": "zero"}}, "g1": {{"kind": "preset", "name": "zero"}}, "g2": {{"kind": "preset", "name": "zero"}}, "T": 10}},
  "grid": {{"panels_per_ray": 8, "nodes_per_panel": 16, "R_max": 30, "grading": 1.6}},
  "derive": {{"h_fit": false, "zero_scan": null}},
  "solve": {{"x": {{"from": 0, "to": 1, "n": 2}}, "t": {{"from": 0, "to": 0.1, "n": 2}}}},
  {files}}}"#
    );
    std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_mkdv-ut");
    for stage in ["spectral-x", "spectral-t", "derive"] {
        let st = Command::new(bin).args([stage, "--config"]).arg(&cfg).output().map_err(|e| e.to_string())?;
        if !st.status.success() {
            return Err(format!("{stage} failed: {}", String::from_utf8_lossy(&st.stderr)));
        }
    }
    let st = Command::new(bin).args(["solve", "--config"]).arg(&cfg).output().map_err(|e| e.to_string())?;
    st.status.code().ok_or_else(|| "solve killed".into())
}

fn main() {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let mut failed = 0;
    for id in 1..=NAMES.len() as u32 {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let mut c = criterion(id);
        if id == 11 {
            let dir = std::env::temp_dir().join(format!("mkdv-ut-acceptance-{}", std::process::id()));
            let _ = std::fs::create_dir_all(&dir);
            match gate_exit_code(&dir) {
                Ok(3) => c.detail.push_str("; binary exits 3"),
                Ok(code) => {
                    c.passed = false;
                    c.detail.push_str(&format!("; binary exit code {code}, want 3"));
                }
                Err(e) => {
                    c.passed = false;
                    c.detail.push_str(&format!("; binary run: {e}"));
                }
            }
            let _ = std::fs::remove_dir_all(&dir);
        }
        println!("{}", c.line());
        if !c.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
