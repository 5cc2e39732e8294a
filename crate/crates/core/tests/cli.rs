use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_membrana");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const EIG: &str = r#"{
  "geometry": {"kind": "two_interval", "x0": 0.0, "a": 0.5, "x1": 1.0, "nodes1": 65, "nodes2": 65},
  "gamma1": 1.0, "gamma2": 2.0, "d": 1.0,
  "c1": 0, "c2": "1"
}"#;

#[test]
fn eig_prints_eigenvalue_and_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "eig.json", EIG);
    let out = tmp.path().join("out");
    let o = run(&["eig", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let value: f64 = stdout.trim().strip_prefix("lambda1 = ").unwrap().parse().unwrap();
    assert!((value - 0.2827).abs() < 1e-3, "{value}");
    let csv = std::fs::read_to_string(out.join("eigenfunction.csv")).unwrap();
    assert!(csv.starts_with("coordinate,side,value\n"));
    assert_eq!(csv.lines().count(), 1 + 65 + 65);
}

#[test]
fn identical_config_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "curve.json",
        r#"{
  "geometry": {"kind": "two_interval", "x0": 0.0, "a": 0.5, "x1": 1.0, "nodes1": 41, "nodes2": 41},
  "gamma1": 1.0, "gamma2": 1.0,
  "lambda2_list": [-100, -10, -1, 0, 0.5, 1.0, 1.5]
}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&["curve-h", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ca = std::fs::read(a.join("hcurve.csv")).unwrap();
    assert_eq!(ca, std::fs::read(b.join("hcurve.csv")).unwrap());
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("lambda2,h,residual\n"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn logistic_without_positive_solution_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "extinct.json",
        r#"{
  "geometry": {"kind": "concentric_radial", "dim": 2, "r1": 0.5, "r2": 1.0, "nodes1": 33, "nodes2": 33},
  "gamma1": 1.0, "gamma2": 1.0, "d": 1.0,
  "beta1": -1, "beta2": -1, "alpha1": 1, "alpha2": 1
}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["logistic", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("logistic.json")).unwrap()).unwrap();
    assert_eq!(report["status"]["kind"], "no_positive_solution");
    assert!((report["gate"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(!out.join("solution.csv").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(tmp.path(), "unknown.json", &EIG.replace("\"d\": 1.0", "\"d\": 1.0, \"extra\": 3"));
    assert_eq!(run(&["eig", "--config", &unknown]).status.code(), Some(2));
    let bad_expr = write_config(tmp.path(), "expr.json", &EIG.replace("\"1\"", "\"1 + y\""));
    assert_eq!(run(&["eig", "--config", &bad_expr]).status.code(), Some(2));
    let missing = write_config(tmp.path(), "missing.json", &EIG.replace("\"gamma1\": 1.0, ", ""));
    assert_eq!(run(&["eig", "--config", &missing]).status.code(), Some(2));
    assert_eq!(run(&["eig", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let bad_tol = write_config(tmp.path(), "tol.json", &EIG.replace("\"d\": 1.0", "\"d\": 1.0, \"tolerances\": {\"step_tol\": -1}"));
    assert_eq!(run(&["eig", "--config", &bad_tol]).status.code(), Some(2));
}

#[test]
fn solver_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // d below the resolvable range of a 21-node mesh
    let cfg = write_config(
        tmp.path(),
        "sweep.json",
        &EIG.replace("\"nodes1\": 65, \"nodes2\": 65", "\"nodes1\": 21, \"nodes2\": 21")
            .replace("\"d\": 1.0", "\"d_list\": [1e-6, 1e-1]"),
    );
    let out = tmp.path().join("out");
    let o = run(&["sweep-d", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tolerances_are_overridable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "tol.json",
        &EIG.replace("\"d\": 1.0", "\"d\": 1.0, \"tolerances\": {\"eigen_residual\": 1e-8, \"step_tol\": 1e-9}"),
    );
    let out = tmp.path().join("out");
    assert_eq!(run(&["eig", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn check_suite_reports_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["check", "--suite", "mms", "--seed", "42", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let reports: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("checks.json")).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert_eq!(run(&["check", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn schema_lists_every_csv() {
    let o = run(&["--schema"]);
    assert_eq!(o.status.code(), Some(0));
    let schema: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(schema["hcurve.csv"], serde_json::json!(["lambda2", "h", "residual"]));
    assert_eq!(
        schema["sweep_eigen_d.csv"],
        serde_json::json!(["param", "value_or_summary", "target", "deviation"])
    );
    assert!(schema.get("large_profile.csv").is_some());
}
