//! End-to-end runs of the `genea` binary.

use std::path::Path;
use std::process::{Command, Output};

fn genea(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genea"))
        .args(args)
        .current_dir(dir)
        .env_remove("GENEA_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sample_matches_golden_newick_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = genea(
        &["sample", "--sampler", "static", "--beta", "1", "--theta", "1", "--n", "5", "--seed", "7", "--format", "newick", "--output", "t.nwk"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("t.nwk")).unwrap(),
        include_str!("fixtures/static_n5_seed7.nwk")
    );
    let o = genea(&["sample", "--n", "3", "--seed", "42", "--output", "t.json"], dir.path());
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("t.json")).unwrap(),
        include_str!("fixtures/static_n3_seed42.json")
    );
}

#[test]
fn export_round_trips_and_converts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("in.json"), include_str!("fixtures/static_n3_seed42.json")).unwrap();
    let o = genea(&["export", "--input", "in.json", "--format", "json"], dir.path());
    assert_eq!(stdout(&o), include_str!("fixtures/static_n3_seed42.json"));
    let o = genea(&["export", "--input", "in.json", "--format", "csv"], dir.path());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("u,zeta"));
    assert_eq!(text.lines().count(), 4);
    let o = genea(&["export", "--input", "in.json", "--format", "newick", "--output", "o.nwk"], dir.path());
    assert!(o.status.success());
    assert!(std::fs::read_to_string(dir.path().join("o.nwk")).unwrap().trim_end().ends_with(';'));
    let o = genea(&["export", "--input", "missing.json", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["sample", "--sampler", "conditional", "--seed", "1"],
        vec!["sample", "--sampler", "full", "--seed", "1"],
        vec!["sample", "--n", "3"],
        vec!["sample", "--seed", "1", "--theta", "0"],
        vec!["validate", "--suite", "metric-oracle"],
        vec!["validate", "--suite", "nonsense", "--seed", "1"],
        vec!["frobnicate"],
    ] {
        let o = genea(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn seed_from_environment_for_sample_only() {
    let dir = tempfile::tempdir().unwrap();
    let with_env = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_genea"))
            .args(args)
            .current_dir(dir.path())
            .env("GENEA_SEED", "7")
            .output()
            .unwrap()
    };
    let a = with_env(&["sample", "--n", "5"]);
    let b = genea(&["sample", "--n", "5", "--seed", "7"], dir.path());
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(with_env(&["validate", "--suite", "metric-oracle"]).status.code(), Some(2));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# settings\nseed = 7\nn = 5\nsampler = static\nformat = newick\n").unwrap();
    let from_file = genea(&["--config", "run.cfg", "sample", "--output", "a.nwk"], dir.path());
    assert!(from_file.status.success());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("a.nwk")).unwrap(),
        include_str!("fixtures/static_n5_seed7.nwk")
    );
    let flag = genea(&["--config", "run.cfg", "sample", "--seed", "8"], dir.path());
    let direct = genea(&["sample", "--seed", "8", "--n", "5"], dir.path());
    assert_eq!(stdout(&flag), stdout(&direct));
}

#[test]
fn validate_writes_report_and_sets_status() {
    let dir = tempfile::tempdir().unwrap();
    let o = genea(&["validate", "--suite", "metric-oracle", "--seed", "1", "--output", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["suite"], "metric-oracle");
    assert_eq!(report["passed"], true);
    assert_eq!(report["params"]["reps"], 200);
    assert!(report["tests"].as_array().unwrap().iter().all(|t| t["pass"] == true));
}

#[test]
fn length_scaling_rows_and_moments() {
    let dir = tempfile::tempdir().unwrap();
    let o = genea(
        &["length-scaling", "--ns", "10,100", "--reps", "300", "--seed", "5", "--output", "rows.csv", "--moments", "m.csv"],
        dir.path(),
    );
    assert!(o.status.success());
    let rows = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert_eq!(rows.lines().next(), Some("replicate,z0,n_or_eps,raw,compensator,compensated"));
    // Two rows (Lambda_n and L_eps) per replicate and sample size.
    assert_eq!(rows.lines().count(), 1 + 2 * 2 * 300);
    let moments = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(moments, stdout(&o));
    assert_eq!(moments.lines().count(), 3);
}
