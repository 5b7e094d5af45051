use std::path::Path;
use std::process::{Command, Output};

fn peskin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peskin")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_equilibrium_then_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        "circle.json",
        r#"{"n": 32, "t_end": 0.5, "initial": {"uniform_circle": {"radius": 2.0, "center": [1.0, -1.0]}}}"#,
    );
    let o = peskin(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let series = peskin_core::io::read_series(&out.join("series.csv")).unwrap();
    assert!(series.len() > 2);
    for name in ["R_X", "length", "energy", "kappa_star", "stretch_min", "diameter"] {
        let v = series.field(name).unwrap();
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-10), "{name} drifts");
    }

    let o = peskin(&["diagnose", "--curve", out.join("final.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!((report["R_X"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((report["time"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn huge_step_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "huge.json",
        &format!(
            r#"{{"n": 64, "dt": 5.0, "t_end": 50.0, "initial": {{"ellipse": {{"a": 1.5, "b": 1.0}}}},
               "output": {{"dir": "{}"}}}}"#,
            dir.path().join("out").display()
        ),
    );
    let o = peskin(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(dir.path().join("out/series.csv").exists());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "neg.json", r#"{"n": -4, "t_end": 1.0, "initial": {"uniform_circle": {}}}"#);
    let o = peskin(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`n`"), "{}", stderr(&o));

    let cfg = write_config(
        dir.path(),
        "fold.json",
        r#"{"n": 64, "t_end": 1.0, "initial": {"reparam_circle": {"a": [1.5]}}}"#,
    );
    let o = peskin(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not increasing"), "{}", stderr(&o));

    let o = peskin(&["verify", "--config", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = peskin(&["verify", "--config", &cfg, "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_ellipse_monotone_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ellipse.json",
        r#"{"n": 128, "t_end": 3.0, "initial": {"ellipse": {"a": 1.2, "b": 1.0}}}"#,
    );
    let report = dir.path().join("report.json");
    let o = peskin(&["verify", "--config", &cfg, "--suite", "monotone", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS phi_star non-increasing"));
    let checks: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let checks = checks.as_array().unwrap();
    assert_eq!(checks.len(), 9);
    assert!(checks.iter().all(|c| c["outcome"]["status"] == "passed"));
}

#[test]
fn verify_reports_failures_with_exit_1() {
    // with non-uniform tension the Hookean energy is not a Lyapunov function:
    // the circle re-stretches toward |X'| ∝ 1/q and 𝓔 grows
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tension.json",
        r#"{"n": 64, "t_end": 1.0, "elasticity": {"cosine_series": {"a0": 1.0, "cos": [0.5]}},
            "initial": {"uniform_circle": {}}}"#,
    );
    let o = peskin(&["verify", "--config", &cfg, "--suite", "monotone"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL energy non-increasing"), "{}", stdout(&o));
}

#[test]
fn compare_tangential_and_converge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "reparam.json",
        r#"{"n": 64, "t_end": 0.5, "initial": {"reparam_circle": {"a": [0.3]}}}"#,
    );
    let o = peskin(&["compare-tangential", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS full vs tangential deviation"));

    let ellipse = write_config(dir.path(), "ellipse.json", r#"{"n": 64, "t_end": 0.5, "initial": {"ellipse": {"a": 1.5, "b": 1.0}}}"#);
    let o = peskin(&["compare-tangential", "--config", &ellipse]);
    assert_eq!(o.status.code(), Some(2));

    let o = peskin(&["converge", "--config", &ellipse]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("temporal order"));
}
