//! End-to-end checks of the `circlepat` binary: example → validate
//! round trips, exit codes, and JSON error objects on bad input.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn circlepat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circlepat"))
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("circlepat-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("create temp dir");
    dir.join(name)
}

#[test]
fn example_then_validate_exits_zero_for_both_examples() {
    for name in ["hex-torus", "bolza"] {
        let path = temp_path(&format!("{name}.json"));
        let out = circlepat()
            .args(["example", name, "--output"])
            .arg(&path)
            .output()
            .expect("run example");
        assert!(out.status.success(), "example {name}: {out:?}");

        let val = circlepat()
            .args(["validate"])
            .arg(&path)
            .output()
            .expect("run validate");
        assert!(
            val.status.success(),
            "validate {name} exits 0, got {:?}\nstdout: {}",
            val.status.code(),
            String::from_utf8_lossy(&val.stdout)
        );
        let report: serde_json::Value =
            serde_json::from_slice(&val.stdout).expect("validate emits JSON");
        assert_eq!(
            report["theorem"]["verdict"], "ok",
            "theorem verdict for {name}"
        );
        eprintln!(
            "cli round trip {name}: genus {}, max discrepancy {}",
            report["triangulation"]["genus"], report["theorem"]["max_discrepancy"]
        );
    }
}

#[test]
fn missing_file_and_malformed_json_exit_three() {
    let out = circlepat()
        .args(["validate", "/nonexistent/pattern.json"])
        .output()
        .expect("run validate");
    assert_eq!(out.status.code(), Some(3), "missing file exits 3");
    let err: serde_json::Value = serde_json::from_slice(&out.stdout).expect("JSON error object");
    assert!(err["error"].is_string(), "error object has a message: {err}");

    let path = temp_path("garbage.json");
    fs::write(&path, "{ not json").expect("write garbage");
    let out = circlepat()
        .args(["validate"])
        .arg(&path)
        .output()
        .expect("run validate");
    assert_eq!(out.status.code(), Some(3), "malformed JSON exits 3");
}

#[test]
fn check_theorem_gates_on_tolerance() {
    let path = temp_path("bolza-thm.json");
    let out = circlepat()
        .args(["example", "bolza", "--output"])
        .arg(&path)
        .output()
        .expect("run example");
    assert!(out.status.success(), "example bolza");

    let pass = circlepat()
        .args(["check-theorem"])
        .arg(&path)
        .args(["--tol", "1e-8"])
        .output()
        .expect("run check-theorem");
    assert!(pass.status.success(), "check-theorem at 1e-8 passes");

    let fail = circlepat()
        .args(["check-theorem"])
        .arg(&path)
        .args(["--tol", "1e-30"])
        .output()
        .expect("run check-theorem");
    assert_eq!(
        fail.status.code(),
        Some(1),
        "unattainable tolerance exits 1"
    );
}
