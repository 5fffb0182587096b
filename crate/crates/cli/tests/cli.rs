use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gibbsflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbsflow"))
        .args(args)
        .env_remove("GIBBSFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sampling_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = gibbsflow(&["sample", "--family", "white", "--nmax", "8", "--real", "--seed", "1", "--out", arg(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report = read_json(&a);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["subcommand"], "sample");
    let field = &report["report"]["samples"][0];
    assert_eq!(field["n_max"], 8);
    assert_eq!(field["real_valued"], true);
}

#[test]
fn resolved_config_reruns_to_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("cm.json");
    let o = gibbsflow(&["cm", "--nmax", "6", "--samples", "400", "--seed", "3", "--out", arg(&first)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let config = dir.path().join("cm.config.json");
    let cfg = read_json(&config);
    assert_eq!(cfg["subcommand"], "cm");
    assert_eq!(cfg["params"]["samples"], 400);
    assert!(cfg.get("report").is_none());

    let second = dir.path().join("again.json");
    let o = gibbsflow(&["--config", arg(&config), "--out", arg(&second)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    // A report carries its configuration too.
    let third = dir.path().join("third.json");
    let o = gibbsflow(&["--config", arg(&first), "--out", arg(&third)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&third).unwrap());
}

#[test]
fn feldman_hajek_example() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fh.csv");
    let o = gibbsflow(&[
        "dichotomy", "--mode", "feldman-hajek", "--beta", "1", "--gamma", "2", "--s", "0", "--csv", arg(&csv),
    ]);
    assert!(o.status.success());
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["report"]["verdict"], "singular");
    for pair in report["report"]["partial_sums"].as_array().unwrap() {
        let n = pair[0].as_f64().unwrap();
        let s = pair[1].as_f64().unwrap();
        assert!((s - 2.0 * n / 9.0).abs() <= 1e-12 * s);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,partial_sum\n1,"));
    assert_eq!(report["csv_columns"], serde_json::json!(["n", "partial_sum"]));
}

#[test]
fn kakutani_example() {
    let o = gibbsflow(&["dichotomy", "--mode", "kakutani", "--u-decay", "1.0", "--v-decay", "1.4", "--nmax", "100000"]);
    assert!(o.status.success());
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["report"]["verdict"], "singular");
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_gibbsflow"))
            .args(["cm", "--nmax", "4", "--samples", "300", "--seed", "9"])
            .env("GIBBSFLOW_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run("1"), run("4"));
    let explicit = gibbsflow(&["--threads", "2", "cm", "--nmax", "4", "--samples", "300", "--seed", "9"]);
    assert_eq!(explicit.stdout, run("1"));
}

#[test]
fn flagged_runs_exit_with_two() {
    // Far too few draws at far too large noise for the rate to show.
    let o = gibbsflow(&["ldp", "--epsilons", "1.0,0.8", "--samples", "20000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["flagged"], true);
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    assert_eq!(gibbsflow(&["sample", "--bogus"]).status.code(), Some(1));
    assert_eq!(gibbsflow(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gibbsflow(&[]).status.code(), Some(1));

    let o = gibbsflow(&["--config", "/nonexistent/run.config.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/run.config.json"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.config.json");
    std::fs::write(&bad, r#"{"schema_version": 1, "subcommand": "invariance", "params": {"experiment": {"measure": {"kind": "gaussian", "family": "white", "n_max": 4, "real_valued": true, "mean_zero": true}, "equation": {"family": "gkdv", "p": 3, "sign": "plus", "galerkin_projected": true}, "t_final": 1.0, "dt": 0.001, "samples": 10, "seed": 0}, "calibration": 0}}"#).unwrap();
    let o = gibbsflow(&["--config", arg(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.config.json") && err.contains("samples"), "{err}");

    let o = gibbsflow(&["--config", arg(&bad), "sample"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn every_subcommand_documents_its_defaults() {
    for sub in ["sample", "evolve", "invariance", "cm", "dichotomy", "ldp", "entropy-check"] {
        let o = gibbsflow(&[sub, "--help"]);
        assert!(o.status.success());
        let help = String::from_utf8_lossy(&o.stdout);
        assert!(help.contains("[default:"), "{sub}");
        assert!(help.contains("--out") && help.contains("--threads"), "{sub}");
    }
}

#[test]
fn evolve_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init.json");
    std::fs::write(&init, r#"{"n_max": 4, "real_valued": false, "coeffs": [[0,0],[0,0],[0,0],[0.8,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#).unwrap();
    let out = dir.path().join("traj.json");
    let csv = dir.path().join("traj.csv");
    let o = gibbsflow(&[
        "evolve", "--eq", "wick-nls", "--sign", "minus", "--dt", "1e-3", "--t", "0.5", "--init", arg(&init), "--out",
        arg(&out), "--csv", arg(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = &read_json(&out)["report"];
    for key in ["times", "fields", "mass_series", "hamiltonian_series", "blowup_flag"] {
        assert!(traj.get(key).is_some(), "{key}");
    }
    assert_eq!(traj["times"].as_array().unwrap().len(), 11);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("t,mass,hamiltonian\n"));
}

#[test]
fn entropy_example() {
    let o = gibbsflow(&["entropy-check", "--hamiltonian", "quartic", "--beta", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["report"]["maximizer_confirmed"], true);
    assert_eq!(report["params"]["directions"], 20);
}
