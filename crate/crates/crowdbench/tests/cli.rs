//! End-to-end checks of the `bench` binary: exit codes and file outputs.

use std::path::Path;
use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn help_exits_zero() {
    let out = bench().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("bench"));
}

#[test]
fn episode_run_and_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("episode.jsonl");
    let out = bench()
        .args(["episode", "--policy", "orca", "--taga", "--seed", "7"])
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("policy=orca+taga"));
    assert!(stdout.contains("seed=7"));
    assert!(trace.exists());

    let out = bench()
        .arg("validate")
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok:"));
}

#[test]
fn tampered_trace_fails_validation_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("episode.jsonl");
    let status = bench()
        .args(["episode", "--policy", "sf", "--seed", "3"])
        .arg("--trace")
        .arg(&trace)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // Corrupt the reported path length in the header line.
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut header: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    let v = header["path_length"].as_f64().unwrap();
    header["path_length"] = serde_json::json!(v + 1.0);
    lines[0] = serde_json::to_string(&header).unwrap();
    write(&trace, &lines.join("\n"));

    let out = bench()
        .arg("validate")
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("path length"));
}

#[test]
fn missing_or_invalid_config_exits_one() {
    let out = bench()
        .args(["run", "--suite", "/nonexistent/suite.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    write(&bad, "[scenario]\ndt = -1.0\n");
    let out = bench()
        .arg("run")
        .arg("--suite")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    let unknown_cell = dir.path().join("cell.toml");
    write(&unknown_cell, "[suite]\ncells = [\"ds-rnn\"]\n");
    let out = bench()
        .arg("run")
        .arg("--suite")
        .arg(&unknown_cell)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn impossible_placement_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("crowded.toml");
    write(
        &suite,
        r#"
[suite]
episodes = 1
cells = ["orca"]

[scenario]
arena_half_extent = 1.2
n_individuals = 60
n_groups = 0
"#,
    );
    let out = bench()
        .arg("run")
        .arg("--suite")
        .arg(&suite)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("placement"));
}

#[test]
fn small_suite_writes_summary_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.toml");
    write(
        &suite,
        r#"
[suite]
episodes = 2
base_seed = 9
cells = ["orca", "orca+taga"]
"#,
    );
    let out_dir = dir.path().join("results");
    let out = bench()
        .arg("run")
        .arg("--suite")
        .arg(&suite)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.starts_with("model\tSR\tCR\tGCR\tTR\tNT\tPL\tGCRt"));
    assert!(out_dir.join("summary.tsv").exists());
    assert!(out_dir.join("resolved_config.toml").exists());
    assert!(out_dir.join("orca/episode_00009.jsonl").exists());
    assert!(out_dir.join("orca_taga/episode_00010.jsonl").exists());
}
