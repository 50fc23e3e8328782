use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wkb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wkb"))
        .args(args)
        .output()
        .expect("spawn wkb")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SWEEP: &str = r#"{
  "kind": "sweep",
  "potential": {"family": "harmonic"},
  "beta": 1.0,
  "grid": {"x_lo": -0.3, "x_hi": 0.3, "nx": 41, "t_hi": 0.1, "nt": 21},
  "order": 1,
  "hbar": [0.1, 0.05, 0.025]
}"#;

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap_or(""))
        .unwrap_or_else(|_| panic!("stderr: {text}"))
}

#[test]
fn run_then_check_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out = dir.path().join("out");
    let o = wkb(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    for name in ["a0.csv", "a1.csv", "psi_0.csv", "report.json"] {
        assert!(files.contains(&name), "{name} missing from {files:?}");
    }
    assert!(manifest["failure"].is_null());
    assert_eq!(manifest["config"]["order"], 1);

    let c = wkb(&["--check", "--out", out.to_str().unwrap()]);
    assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
}

#[test]
fn check_detects_modified_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out = dir.path().join("out");
    assert!(wkb(&["--config", &cfg, "--out", out.to_str().unwrap()])
        .status
        .success());
    // same byte length, different value: only the rebuilt report can notice
    let a1 = out.join("a1.csv");
    let text = std::fs::read_to_string(&a1).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = &mut lines[300];
    let last = row.pop().unwrap();
    row.push(if last == '1' { '2' } else { '1' });
    std::fs::write(&a1, lines.join("\n") + "\n").unwrap();

    let c = wkb(&["--check", "--out", out.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(3));
    assert_eq!(stderr_json(&c)["reason"], "consistency");
}

#[test]
fn check_detects_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out = dir.path().join("out");
    assert!(wkb(&["--config", &cfg, "--out", out.to_str().unwrap()])
        .status
        .success());
    std::fs::remove_file(out.join("psi_1.csv")).unwrap();
    let c = wkb(&["--check", "--out", out.to_str().unwrap()]);
    assert!(!c.status.success());
    assert!(stderr_json(&c)["message"]
        .as_str()
        .unwrap()
        .contains("psi_1.csv"));
}

#[test]
fn config_errors_exit_2_with_every_issue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kind": "sweep", "potential": {"family": "free"}, "beta": -1,
            "grid": {"x_lo": 0, "x_hi": 1, "nx": 3, "t_hi": 0.1, "nt": 11},
            "order": 9, "hbar": [0.1]}"#,
    );
    let o = wkb(&[
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_json(&o);
    assert_eq!(err["reason"], "config");
    let msg = err["message"].as_str().unwrap();
    for key in ["grid", "order", "hbar"] {
        assert!(msg.contains(key), "{key} not reported in {msg}");
    }
}

#[test]
fn turning_point_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kind": "phase", "potential": {"family": "harmonic"}, "beta": 1,
            "grid": {"x_lo": -2, "x_hi": 2, "nx": 41, "t_hi": 0.1, "nt": 11}}"#,
    );
    let o = wkb(&[
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["reason"], "domain");
    // the failure is still recorded
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["failure"]["exit_code"], 4);
}

#[test]
fn tolerance_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let body = SWEEP.replace(
        r#""order": 1,"#,
        r#""order": 1, "tolerances": {"tol_identity": 1e-14},"#,
    );
    let cfg = write_config(dir.path(), &body);
    let o = wkb(&[
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["reason"], "tolerance");
}

#[test]
fn output_dir_from_config_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let from_cfg = dir.path().join("from-config");
    let body = SWEEP.replacen(
        '{',
        &format!("{{\n  \"output_dir\": {:?},", from_cfg.to_str().unwrap()),
        1,
    );
    let cfg = write_config(dir.path(), &body);
    assert!(wkb(&["--config", &cfg]).status.success());
    assert!(from_cfg.join("report.json").is_file());

    let flag = dir.path().join("from-flag");
    assert!(wkb(&["--config", &cfg, "--out", flag.to_str().unwrap()])
        .status
        .success());
    assert!(flag.join("report.json").is_file());
}

#[test]
fn berry_loop_file_run() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("loop.json");
    // constant loop: phase exactly zero
    std::fs::write(
        &lp,
        r#"{"states": [[[1,0],[0,0]], [[1,0],[0,0]], [[1,0],[0,0]]]}"#,
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"kind": "berry", "berry": {{"loop_file": {:?}}}}}"#,
            lp.to_str().unwrap()
        ),
    );
    let out = dir.path().join("o");
    let o = wkb(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["berry"]["gamma"], 0.0);
    assert!(wkb(&["--check", "--out", out.to_str().unwrap()])
        .status
        .success());
}
