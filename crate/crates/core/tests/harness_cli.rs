use std::path::Path;
use std::process::Command;

use metapersuasion::harness::{self, ExperimentConfig, RegretLedger};

const BIN: &str = env!("CARGO_BIN_EXE_metapersuasion");

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn small(family: &str, tasks: usize, reps: usize) -> String {
    format!(
        r#"{{"family": "{family}", "tasks": {tasks}, "rounds": 4, "replications": {reps}, "seed": 9, "output": "out"}}"#
    )
}

fn code(out: &std::process::Output) -> i32 {
    out.status.code().expect("process exited with a signal")
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for family in ["obp_full", "obp_bandit", "mpp_full", "mpp_partial"] {
        let cfg = ExperimentConfig::from_json(&small(family, 3, 2), dir.path()).unwrap();
        let a = harness::raw_csv(&harness::run(&cfg).unwrap().rows).unwrap();
        let b = harness::raw_csv(&harness::run(&cfg).unwrap().rows).unwrap();
        assert_eq!(a, b, "{family}");
    }
}

#[test]
fn one_task_one_replication_gives_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    for family in ["obp_full", "mpp_partial"] {
        let cfg = ExperimentConfig::from_json(&small(family, 1, 1), dir.path()).unwrap();
        let out = harness::run(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2);
        let text = String::from_utf8(harness::raw_csv(&out.rows).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "#schema=1");
        assert_eq!(lines[1], "family,arm,replication,task,regret,violation,seed");
        assert_eq!(lines.len(), 4);
        if family == "obp_full" {
            assert!(lines[2].split(',').nth(5) == Some(""), "{}", lines[2]);
        }
    }
}

#[test]
fn cli_validate_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.json", &small("mpp_full", 2, 1));
    let out = Command::new(BIN).args(["validate", "--config"]).arg(&good).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"family": "mpp_full", "tasks": 2, "rounds": 4, "seed": 0, "mpp": {"delta": 0.1, "alpha": 1.5}}"#,
    );
    let out = Command::new(BIN).args(["validate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mpp.alpha"));

    let unknown = write_config(dir.path(), "unknown.json", r#"{"family": "mpp_full", "tasks": 2, "rounds": 4, "seed": 0, "colour": 1}"#);
    let out = Command::new(BIN).args(["validate", "--config"]).arg(&unknown).output().unwrap();
    assert_eq!(code(&out), 2);

    let out = Command::new(BIN).args(["run", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(code(&out), 2);

    let out = Command::new(BIN).args(["run", "--family", "nonsense", "--config"]).arg(&good).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn cli_run_then_emit_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small("obp_full", 3, 1));
    let out_dir = dir.path().join("results");
    let out = Command::new(BIN)
        .args(["run", "--reps", "2", "--seed", "4", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["raw.csv", "summary.csv", "ledger.json"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let ledger: RegretLedger = serde_json::from_slice(&std::fs::read(out_dir.join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger.replications, 2);
    assert_eq!(ledger.seed, 4);
    assert_eq!(ledger.arms.len(), 2);
    assert!(ledger.arms.iter().all(|a| a.violation.is_none() && a.regret.mean.len() == 3));

    let out = Command::new(BIN).args(["emit-plots", "--ledger"]).arg(out_dir.join("ledger.json")).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let plots: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("plots.json")).unwrap()).unwrap();
    assert_eq!(plots["series"].as_array().unwrap().len(), 2);

    let out = Command::new(BIN).args(["emit-plots", "--ledger"]).arg(dir.path().join("nope.json")).output().unwrap();
    assert_ne!(code(&out), 0);
}

#[test]
fn infeasible_program_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tight.json",
        r#"{"family": "mpp_full", "tasks": 2, "rounds": 20, "seed": 0,
            "mpp": {"delta": 0.1, "alpha": 0.5, "radius_scale": 0.01}}"#,
    );
    let out = Command::new(BIN).args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 0);
    let out = Command::new(BIN).args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}
