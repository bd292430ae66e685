//! End-to-end checks of the command-line interface: subcommands, exit
//! codes, output files and the output-directory environment override.

use std::path::Path;
use std::process::Command;

fn lfsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lfsim"))
}

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("lfsim-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn run_writes_csv_and_metrics() {
    let dir = temp_dir("run");
    let out = lfsim()
        .args(["run", "--scenario", "waypoints", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all run invariants satisfied"), "{stdout}");
    let csv = std::fs::read_to_string(dir.join("waypoints_trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,agent_id,x_1,x_2,u_1,epoch_index\n"));
    let metrics = std::fs::read_to_string(dir.join("waypoints_metrics.toml")).unwrap();
    assert!(metrics.contains("arrival_error"));
}

#[test]
fn design_prints_and_saves_the_plan() {
    let dir = temp_dir("design");
    let out = lfsim()
        .args(["design", "--scenario", "waypoints", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("6.7178"), "{stdout}");
    let plan = std::fs::read_to_string(dir.join("waypoints_plan.toml")).unwrap();
    assert!(plan.contains("u_max = 5.0"));
}

#[test]
fn out_dir_env_override_applies() {
    let dir = temp_dir("env");
    let out = lfsim()
        .args(["design", "--scenario", "waypoints"])
        .env("LFSIM_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("waypoints_plan.toml").exists());
}

#[test]
fn validate_reports_every_issue_and_fails() {
    let dir = temp_dir("validate");
    let mut text = lfsim::config::BUILTIN_WAYPOINTS.to_string();
    text = text.replace(
        "id = 3\na = [[0.0, 1.0], [0.0, 0.0]]\nb = [[0.0], [1.0]]\nx0 = [-2.0, 0.0]",
        "id = 3\na = [[1.0, 0.0], [0.0, 1.0]]\nb = [[1.0], [0.0]]\nx0 = [-2.0, 0.0, 9.0]",
    );
    let path = dir.join("broken.toml");
    std::fs::write(&path, text).unwrap();
    let out = lfsim().arg("validate").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("follower 3"), "{stderr}");

    let ok = lfsim()
        .arg("validate")
        .arg(fixture_path())
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
}

#[test]
fn unknown_scenario_fails_cleanly() {
    let out = lfsim().args(["run", "--scenario", "missing.toml"]).output().unwrap();
    assert!(!out.status.success());
}

fn fixture_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/msd.toml")
}
