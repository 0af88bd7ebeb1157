//! End-to-end binary tests: exit codes, artifacts, and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn run(config: &str, out_dir: &Path, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().expect("config dir");
    let config_path = dir.path().join("experiment.cfg");
    std::fs::write(&config_path, config).expect("write config");
    Command::new(env!("CARGO_BIN_EXE_navierlab"))
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(out_dir)
        .args(extra)
        .output()
        .expect("spawn navierlab")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing artifact {}: {}", name, e))
}

const CONFORMING: &str = "\
[domain]
shape = disc

[problem]
m = 2
alpha = 0 0
f = constant 1.0

[grid]
n_cells = 16
";

#[test]
fn conforming_run_exits_zero_with_all_artifacts() {
    let out = tempfile::tempdir().expect("out dir");
    let output = run(CONFORMING, out.path(), &[]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("mu_hat = 0"));
    assert!(stdout.contains("verdict = PASS"));
    let report = read(out.path(), "report.txt");
    assert!(report.contains("mu_hat = 0"));
    assert!(read(out.path(), "fields.csv").starts_with("i,j,x1,x2,u_1,u_2\n"));
    assert!(read(out.path(), "sweep.csv").starts_with("lambda,component,min_v,argmin_i,argmin_j\n"));
    assert!(out.path().join("plotdata/sweep.dat").exists());
}

#[test]
fn quiet_suppresses_stdout_but_not_artifacts() {
    let out = tempfile::tempdir().expect("out dir");
    let output = run(CONFORMING, out.path(), &["--quiet"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(output.stdout.is_empty(), "quiet run still printed");
    assert!(out.path().join("report.txt").exists());
}

#[test]
fn reruns_produce_byte_identical_csv_artifacts() {
    let first = tempfile::tempdir().expect("first out");
    let second = tempfile::tempdir().expect("second out");
    assert_eq!(run(CONFORMING, first.path(), &["--quiet"]).status.code(), Some(0));
    assert_eq!(run(CONFORMING, second.path(), &["--quiet"]).status.code(), Some(0));
    for name in ["fields.csv", "sweep.csv"] {
        assert_eq!(
            read(first.path(), name),
            read(second.path(), name),
            "{} differs between identical runs",
            name
        );
    }
}

#[test]
fn negative_control_exits_zero_by_violating_a_plane() {
    let config = "\
[domain]
shape = shifted-disc

[problem]
m = 1
alpha = 0
f = constant 1.0

[grid]
n_cells = 16
";
    let out = tempfile::tempdir().expect("out dir");
    let output = run(config, out.path(), &["--quiet"]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report = read(out.path(), "report.txt");
    assert!(report.contains("violated_plane_offset = 0."), "report must name the violating offset:\n{}", report);
    assert!(report.contains("first_violation = 0."));
}

#[test]
fn starved_solver_exits_one_and_still_reports() {
    let config = "\
[domain]
shape = disc

[problem]
m = 1
alpha = 0
f = affine 0.5 1.0

[grid]
n_cells = 16

[solve]
picard_max_iter = 1
";
    let out = tempfile::tempdir().expect("out dir");
    let output = run(config, out.path(), &["--quiet"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("did not converge"), "stderr: {}", stderr);
    let report = read(out.path(), "report.txt");
    assert!(report.contains("verdict = FAIL"));
}

#[test]
fn malformed_config_exits_two_with_the_line_number() {
    let config = "[domain]\nshape = disc\nradius = wobbly\n";
    let out = tempfile::tempdir().expect("out dir");
    let output = run(config, out.path(), &[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3"), "stderr: {}", stderr);
    assert!(!out.path().join("report.txt").exists(), "no run should start");
}

#[test]
fn missing_required_key_exits_two_naming_the_key() {
    let config = "\
[domain]
shape = disc

[problem]
alpha = 0
f = constant 1.0

[grid]
n_cells = 16
";
    let out = tempfile::tempdir().expect("out dir");
    let output = run(config, out.path(), &[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("'m'"), "stderr: {}", stderr);
}
