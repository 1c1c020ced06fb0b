//! End-to-end checks of the `gcgsr` binary: spec round trips, output
//! determinism, and the error contract (nonzero exit plus a parsable
//! `error:` line).

use std::path::Path;
use std::process::{Command, Output};

fn gcgsr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcgsr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

const SMALL_SPEC: &str = r#"
name = "cli-smoke"
mask_size = 7
monte_carlo_runs = 2
base_seed = 5

[graph]
source = "kronecker"
order = 2

[signal]
source = "bandlimited"
bandwidth = 3

[noise]
family = "alpha-stable"
p = 1.3
mu = 0.0
tau = 0.005

[[solvers]]
label = "gc-gsr"
[solvers.config]
step_size = 0.05
gamma = 100.0
max_iters = 50
stop_tol = 0.0
[solvers.config.algorithm]
name = "gc-gsr"
[solvers.config.kernel]
mode = "fixed"
alpha = 2.0
beta = 1.0
"#;

#[test]
fn run_emits_deterministic_outputs() {
    // Two executions in sibling working directories with identical
    // arguments must produce identical bytes.
    let dir = tempfile::tempdir().unwrap();
    for sub in ["one", "two"] {
        let cwd = dir.path().join(sub);
        std::fs::create_dir_all(&cwd).unwrap();
        std::fs::write(cwd.join("spec.toml"), SMALL_SPEC).unwrap();
        let out = gcgsr(&["run", "spec.toml", "--out", "out"], &cwd);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("final NMSD"), "stdout: {stdout}");
    }

    for file in ["trace.csv", "summary.csv", "spec.echo"] {
        let a = std::fs::read(dir.path().join("one/out").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("two/out").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between executions");
        assert!(!a.is_empty());
    }
    let trace = std::fs::read_to_string(dir.path().join("one/out/trace.csv")).unwrap();
    assert!(trace.starts_with("solver,run,iteration,nmsd_db\n"));
    // 2 runs x 50 iterations plus the header.
    assert_eq!(trace.lines().count(), 1 + 2 * 50);
}

#[test]
fn run_honors_seed_and_runs_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.toml"), SMALL_SPEC).unwrap();
    let out = gcgsr(
        &["run", "spec.toml", "--seed", "9", "--runs", "1", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success());
    let echo = std::fs::read_to_string(dir.path().join("o/spec.echo")).unwrap();
    assert!(echo.contains("base_seed = 9"));
    assert!(echo.contains("monte_carlo_runs = 1"));
    let trace = std::fs::read_to_string(dir.path().join("o/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 50);
}

#[test]
fn calibrate_reports_step_sizes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.toml"), SMALL_SPEC).unwrap();
    let out = gcgsr(&["calibrate", "spec.toml", "--target-drop", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gc-gsr: step_size = "), "stdout: {stdout}");
}

#[test]
fn bench_writes_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcgsr(
        &["bench", "--sizes", "24,48", "--steps", "40", "--out", "bench"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("bench/bench.csv")).unwrap();
    assert!(csv.starts_with("algorithm,n,median_step_seconds\n"));
    // Three solvers, two sizes each.
    assert_eq!(csv.lines().count(), 1 + 6);
}

#[test]
fn fetch_data_materializes_the_bundled_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcgsr(&["fetch-data", "--out", "d/sensors.csv"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("d/sensors.csv")).unwrap();
    assert!(csv.starts_with("sensor_id,x,y,temperature,timestamp\n"));
    assert_eq!(csv.lines().count(), 55);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Intel Berkeley"));
}

#[test]
fn missing_spec_fails_with_parsable_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcgsr(&["run", "no-such-spec.toml"], dir.path());
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.lines().any(|l| l.starts_with("error: ")),
        "stderr: {stderr}"
    );
}

#[test]
fn invalid_spec_fails_with_parsable_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "name = \"x\"\n").unwrap();
    let out = gcgsr(&["run", "bad.toml"], dir.path());
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.lines().any(|l| l.starts_with("error: ")),
        "stderr: {stderr}"
    );
}
