use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_alexandrov"));
    c.env_remove("ALEXANDROV_OUT_DIR");
    c
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("alexandrov-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn passing_run_exits_zero_and_writes_both_files() {
    let d = scratch("pass");
    let o = bin().args(["bound", "--out"]).arg(&d).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("bound.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["schema_version"], 1);
    assert!(
        fs::read_to_string(d.join("bound.csv"))
            .unwrap()
            .lines()
            .count()
            > 1
    );
}

#[test]
fn failing_check_exits_one_and_still_reports() {
    let d = scratch("fail");
    let cfg = write(
        &d,
        r#"{"schema_version": 1, "experiment": "curvature", "seed": 3,
            "params": {"samples": 300, "entries": [
              {"space": {"kind": "euclidean_cone", "theta_total": 7.853981633974483}, "kappa": 0}]}}"#,
    );
    let o = bin()
        .args(["curvature", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&d)
        .output()
        .unwrap();
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("curvature.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn missing_seed_is_a_config_error() {
    let d = scratch("seed");
    let o = bin().args(["sllc", "--out"]).arg(&d).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert!(!d.join("sllc.json").exists());
}

#[test]
fn validate_names_offending_fields() {
    let d = scratch("validate");
    let bad = write(
        &d,
        r#"{"schema_version": 1, "experiment": "sllc", "seed": 1, "params": {"flow": {"eps": 0}}}"#,
    );
    let o = bin()
        .args(["validate", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("params.flow.eps"), "{}", stdout(&o));

    let nested = write(
        &d,
        r#"{"schema_version": 1, "experiment": "sllc", "seed": 1, "params": {"flow": {"radius": 1}}}"#,
    );
    let o = bin()
        .args(["validate", "--config"])
        .arg(&nested)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(
        stdout(&o).starts_with("params.flow.radius:"),
        "{}",
        stdout(&o)
    );

    let noseed = write(&d, r#"{"schema_version": 1, "experiment": "fill"}"#);
    let o = bin()
        .args(["validate", "--config"])
        .arg(&noseed)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).starts_with("seed"), "{}", stdout(&o));

    let good = write(
        &d,
        r#"{"schema_version": 1, "experiment": "sllc", "seed": 4, "tolerance": 1e-4}"#,
    );
    let o = bin()
        .args(["validate", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn unreadable_config_exits_two() {
    let o = bin()
        .args(["validate", "--config", "/nonexistent/alexandrov.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = bin()
        .args(["bg", "--config", "/nonexistent/alexandrov.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn subcommand_must_match_config() {
    let d = scratch("mismatch");
    let cfg = write(&d, r#"{"schema_version": 1, "experiment": "bg"}"#);
    let o = bin()
        .args(["bound", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&d)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment"));
}

#[test]
fn output_directory_precedence() {
    let d = scratch("precedence");
    let (flag, env, file) = (d.join("flag"), d.join("env"), d.join("file"));
    let cfg = write(
        &d,
        &serde_json::json!({"schema_version": 1, "experiment": "bound", "output": {"dir": file}})
            .to_string(),
    );

    let o = bin()
        .args(["bound", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(file.join("bound.json").exists());

    let o = bin()
        .args(["bound", "--config"])
        .arg(&cfg)
        .env("ALEXANDROV_OUT_DIR", &env)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(env.join("bound.json").exists());

    let o = bin()
        .args(["bound", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag)
        .env("ALEXANDROV_OUT_DIR", &env)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(flag.join("bound.json").exists());
}

#[test]
fn tolerance_flag_overrides_config() {
    let d = scratch("tol");
    let cfg = write(
        &d,
        r#"{"schema_version": 1, "experiment": "bound", "tolerance": 1e-3}"#,
    );
    let o = bin()
        .args(["bound", "--config"])
        .arg(&cfg)
        .args(["--tol", "0.25", "--out"])
        .arg(&d)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("bound.json")).unwrap()).unwrap();
    assert_eq!(report["tolerance"], 0.25);
}

#[test]
fn help_lists_exit_codes() {
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("Exit status"), "{}", stdout(&o));
}
