use std::path::Path;
use std::process::{Command, Output};

fn nldiff(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nldiff"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn limit_with_defaults_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = nldiff(&["limit", "--config", "defaults"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("limit.csv")).unwrap();
    assert!(csv.starts_with("manifold,dimension,test_function,eps,error,order\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("limit.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert!(summary["config"]["limit"].is_object());
}

#[test]
fn coarse_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = nldiff(&["all", "--grid-scale", "0.5"], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 8);
}

#[test]
fn csv_bodies_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(nldiff(&["spectrum"], d.path()).status.code(), Some(0));
    }
    for f in ["spectrum_circle.csv", "spectrum_sphere.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nldiff(&["limit", "--config", "/definitely/not/here.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schema_violation_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[limit]\nepsilon = [0.1]\n").unwrap();
    let o = nldiff(&["limit", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nldiff(&["everything"], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_assertions_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    std::fs::write(&cfg, "[comparison]\npairs = 2\ntol = -1.0\n").unwrap();
    let o = nldiff(&["comparison", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn shipped_config_file_loads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/defaults.toml");
    let o = nldiff(&["heat-decay", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
