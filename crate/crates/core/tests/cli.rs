use std::path::Path;
use std::process::{Command, Output};

use levy_ssk::experiments::{ExperimentConfig, ExperimentKind};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_levy-ssk"));
    cmd.env_remove("LEVY_SSK_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string(cfg).unwrap()).unwrap();
    path
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("experiment"));
    let version = run(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
    assert!(stdout(&version).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["sample-spectrum"]).status.code(), Some(1));
    assert_eq!(run(&["sample-spectrum", "--n", "5", "--alpha", "2.5"]).status.code(), Some(1));
    assert_eq!(run(&["free-energy", "--beta", "-1", "--eigs", "1,0", "--bn", "1"]).status.code(), Some(1));
    let missing = run(&["experiment", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
}

#[test]
fn free_energy_at_n2_agrees_with_bessel() {
    let o = run(&["free-energy", "--eigs", "3,-1", "--bn", "2", "--beta", "0.7", "--mc-samples", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let q = v["quadrature"]["log_z"].as_f64().unwrap();
    let b = v["bessel_n2"]["log_z"].as_f64().unwrap();
    assert!((q - b).abs() < 1e-8, "{q} vs {b}");
}

#[test]
fn sample_spectrum_is_seed_deterministic() {
    let a = run(&["sample-spectrum", "--n", "20", "--seed", "9", "--full"]);
    let b = run(&["sample-spectrum", "--n", "20", "--seed", "9", "--full"]);
    let c = run(&["sample-spectrum", "--n", "20", "--seed", "10", "--full"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn series_and_diagnostics() {
    let s = run(&["series", "--terms", "50"]);
    assert_eq!(s.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&s)).unwrap();
    assert!(v.get("divergent").is_some());
    let d = run(&["diagnostics", "--n", "50", "--seed", "3"]);
    assert_eq!(d.status.code(), Some(0));
    serde_json::from_str::<serde_json::Value>(&stdout(&d)).unwrap();
}

#[test]
fn experiment_writes_outputs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::new(ExperimentKind::Frechet, 1.2, 0.6, vec![20, 40], 30, 77);
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("run");
    let o = bin()
        .args(["experiment", "--plot", "--threads", "2", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("PASS") || text.contains("FAIL"));
    for f in ["trials.csv", "summary.json", "ecdf.svg", "lambda1_hist_n20.svg", "lambda1_hist_n40.svg"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert!(csv.starts_with("# levy-ssk "));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 60);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["manifest"]["master_seed"], 77);

    // the summary JSON is itself a valid config
    let again = dir.path().join("again");
    let o = bin()
        .args(["experiment", "--config"])
        .arg(out.join("summary.json"))
        .arg("--out")
        .arg(&again)
        .env("LEVY_SSK_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv, std::fs::read_to_string(again.join("trials.csv")).unwrap());
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"alpha": 3.0}"#).unwrap();
    let o = bin().args(["experiment", "--config"]).arg(&path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}
