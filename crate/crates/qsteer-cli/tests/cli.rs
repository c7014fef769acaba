//! Command-line surface: exit codes, dry runs, warnings, environment
//! variables, and the single-point sweep/run equivalence.

use std::path::Path;
use std::process::{Command, Output};

fn qsteer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsteer"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const FAST_BELL: &str = "n_qubits = 2\ntarget = bell\nm = 40\nseed = 4\np1 = 0.9\nf_star = 0.95\nmax_steps = 800\nbin_width = 1\n";

#[test]
fn dry_run_of_a_bundled_config_succeeds() {
    let out = qsteer(&["run", "--config", "bell_n2_fstar99", "--dry-run"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("config ok"), "stdout: {stdout}");
}

#[test]
fn missing_config_exits_with_code_2() {
    let out = qsteer(&["run", "--config", "no_such_config_anywhere", "--dry-run"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("config error"), "stderr: {stderr}");
}

#[test]
fn bad_config_contents_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        "n_qubits = 2\ntarget = bell\nbogus_key = 1\n",
        "n_qubits = 2\ntarget = bell\nf_star = 1.5\n",
        "n_qubits = 2\n",
        "n_qubits = 2\ntarget = bell\nweights = 0.5,0.5\np1 = 0.9\n",
    ] {
        let path = write_config(dir.path(), "bad.conf", bad);
        let out = qsteer(&["run", "--config", &path, "--dry-run"]);
        assert_eq!(out.status.code(), Some(2), "accepted bad config: {bad}");
    }
}

#[test]
fn invalid_thread_environment_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.conf", FAST_BELL);
    let out = Command::new(env!("CARGO_BIN_EXE_qsteer"))
        .args(["run", "--config", &path, "--out", dir.path().join("o").to_str().unwrap()])
        .env("QSTEER_THREADS", "not_a_number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weak_limit_violation_warns_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "hot.conf",
        "n_qubits = 2\ntarget = bell\ndt = 0.8\nm = 10\n",
    );
    let out = qsteer(&["run", "--config", &path, "--dry-run"]);
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("weak-measurement bound"), "stderr: {stderr}");
}

#[test]
fn run_writes_the_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.conf", FAST_BELL);
    let out_dir = dir.path().join("results");
    let out = qsteer(&["run", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    for file in ["summary.json", "histogram.csv", "curves.csv"] {
        assert!(out_dir.join(file).is_file(), "missing {file}");
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("N_m"), "stdout: {stdout}");
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.conf", FAST_BELL);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out_dir, seed) in [(&a, "4"), (&b, "77"), (&c, "77")] {
        let out = qsteer(&[
            "run", "--config", &path, "--seed", seed, "--out", out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let read = |d: &Path| std::fs::read(d.join("histogram.csv")).unwrap();
    assert_ne!(read(&a), read(&b), "different seeds agreed");
    assert_eq!(read(&b), read(&c), "same seed + flag disagreed");
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.conf", FAST_BELL);
    let run_dir = dir.path().join("run");
    let sweep_dir = dir.path().join("sweep");
    assert!(qsteer(&["run", "--config", &path, "--out", run_dir.to_str().unwrap()])
        .status
        .success());
    assert!(qsteer(&[
        "sweep", "--config", &path, "--axis", "f_star", "--values", "0.95",
        "--out", sweep_dir.to_str().unwrap(),
    ])
    .status
    .success());
    let summary = std::fs::read_to_string(run_dir.join("summary.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&summary).unwrap();
    let sweep = std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    let row: Vec<&str> = sweep.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0.95");
    assert_eq!(row[1].parse::<u64>().unwrap(), json["n_m"].as_u64().unwrap());
    assert_eq!(row[2].parse::<f64>().unwrap(), json["n_s"].as_f64().unwrap());
    assert_eq!(
        row[4].parse::<f64>().unwrap(),
        json["converged_fraction"].as_f64().unwrap()
    );
}

#[test]
fn sweep_rejects_unknown_axes_and_bad_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.conf", FAST_BELL);
    let bad_axis = qsteer(&[
        "sweep", "--config", &path, "--axis", "coupling", "--values", "1.0", "--dry-run",
    ]);
    assert_eq!(bad_axis.status.code(), Some(2));
    let bad_value = qsteer(&[
        "sweep", "--config", &path, "--axis", "n", "--values", "2.5", "--dry-run",
    ]);
    assert_eq!(bad_value.status.code(), Some(2));
    let ok = qsteer(&[
        "sweep", "--config", &path, "--axis", "f_star", "--values", "0.9,0.95", "--dry-run",
    ]);
    assert!(ok.status.success());
}

#[test]
fn validate_rejects_a_bad_config_before_running_checks() {
    let out = qsteer(&["validate", "--config", "no_such_file"]);
    assert_eq!(out.status.code(), Some(2));
}
