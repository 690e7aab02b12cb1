//! End-to-end checks of the lu25d binary: every subcommand runs, file
//! output lands where asked, and bad input fails cleanly.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lu25d"))
}

#[test]
fn simulate_writes_csv() {
    let dir = std::env::temp_dir().join("lu25d-cli-sim");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("report.csv");
    let status = bin()
        .args(["simulate", "--n", "32", "--v", "4", "--grid", "2x2x2"])
        .args(["--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("grid,n,v,seed,phase"));
    assert!(text.contains("panel-reduction-total"));
}

#[test]
fn simulate_ledger_json_and_default_v() {
    let output = bin()
        .args(["simulate", "--n", "32", "--grid", "2x2x1", "--ledger"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("superstep,phase,proc_pi"));

    let output = bin()
        .args(["simulate", "--n", "32", "--v", "2", "--grid", "2x2x1", "--format", "json"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["n"], 32);
    assert!(v["measured"]["schur-update"].as_u64().unwrap() > 0);
}

#[test]
fn model_emits_all_formulas() {
    let output = bin()
        .args(["model", "--n", "64", "--v", "4", "--p", "64", "--preset", "cube", "--rho", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    for row in ["eq1_original_step", "eq3_cumulative", "lemma8_claim", "lower_bound_q"] {
        assert!(text.contains(row), "missing {row}");
    }
}

#[test]
fn sweep_from_spec_file() {
    let dir = std::env::temp_dir().join("lu25d-cli-sweep");
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("spec.json");
    std::fs::write(
        &spec,
        r#"{"n": 32, "v": 2, "grids": ["2x2x1", "3x3x1"], "seeds": [1, 2]}"#,
    )
    .unwrap();
    let output = bin()
        .args(["sweep", "--spec", spec.to_str().unwrap(), "--format", "json"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    assert_eq!(v["skipped"].as_array().unwrap().len(), 1);
}

#[test]
fn pivot_stats_prints_histogram() {
    let output = bin()
        .args(["pivot-stats", "--n", "32", "--v", "4", "--grid", "2x2x1", "--seed", "3"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("chi-square"));
}

#[test]
fn bad_grid_fails_cleanly() {
    let output = bin()
        .args(["simulate", "--n", "32", "--v", "4", "--grid", "3x3x1"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("error"), "stderr: {err}");
}
