use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn errw(args: &[&str], env_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_errw"));
    cmd.args(args).env_remove("ERRW_OUT_DIR");
    if let Some(d) = env_dir {
        cmd.env("ERRW_OUT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "name": "small",
  "cycle_length": 4,
  "weights": {"family": "power", "parameters": {"rho": 2.0}},
  "horizon": 2000,
  "replicas": 16,
  "seed": 5
}"#;

#[test]
fn list_names_every_preset() {
    let o = errw(&["list"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["square-attraction", "square-linear-control", "triangle-attraction", "stay-probability"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn det_m_passes_its_checks() {
    let o = errw(&["det-m", "--from", "3", "--to", "8"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn simulate_from_config_with_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = errw(&["simulate", "--config", &cfg], None);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let va = stdout_json(&a);
    assert_eq!(va["config"]["seed"], 5);
    assert_eq!(va["aggregate"]["replicas"], 16);

    let b = errw(&["simulate", "--config", &cfg, "--seed", "6", "--replicas", "8"], None);
    let vb = stdout_json(&b);
    assert_eq!(vb["config"]["seed"], 6);
    assert_eq!(vb["aggregate"]["replicas"], 8);
    assert_ne!(va["provenance"]["config_hash"], vb["provenance"]["config_hash"]);
}

#[test]
fn output_destination_and_parallelism_invariance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let one = dir.path().join("one.json");
    let eight = dir.path().join("nested/eight.json");
    for (p, threads) in [(&one, "1"), (&eight, "8")] {
        let o = errw(&["simulate", "--config", &cfg, "--parallelism", threads, "--out", p.to_str().unwrap()], None);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
    }
    assert_eq!(fs::read(&one).unwrap(), fs::read(&eight).unwrap());

    let env_dir = dir.path().join("env");
    let o = errw(&["simulate", "--config", &cfg, "--format", "csv"], Some(&env_dir));
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(env_dir.join("simulate.csv")).unwrap();
    assert!(csv.starts_with("name,cycle_length,engine,"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn config_errors_exit_two_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let missing = errw(&["simulate", "--config", "/nonexistent/cfg.json"], None);
    assert_eq!(code(&missing), 2);

    let cfg = write_config(dir.path(), &SMALL.replace("\"seed\": 5", "\"seed\": 5, \"sede\": 1"));
    let o = errw(&["simulate", "--config", &cfg], None);
    assert_eq!(code(&o), 2);
    let summary: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["kind"], "config");
    assert!(summary["errors"].to_string().contains("sede"));

    let cfg = write_config(dir.path(), &SMALL.replace("\"cycle_length\": 4", "\"cycle_length\": 2"));
    let o = errw(&["simulate", "--config", &cfg], None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle_length"));

    assert_eq!(code(&errw(&["no-such-command"], None)), 2);
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out.json");
    let o = errw(&["det-m", "--out", target.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
}

#[test]
fn oracle_and_martingale_check() {
    let o = errw(&["oracle", "--experiment", "stay-probability", "--tol", "1e-14"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("4.19422441795e-1"), "{text}");

    let m = errw(&["martingale-check", "--replicas", "4", "--horizon", "2000", "--depth", "4"], None);
    assert_eq!(code(&m), 0, "{}", String::from_utf8_lossy(&m.stderr));
}
