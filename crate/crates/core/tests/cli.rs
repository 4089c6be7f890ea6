use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use scs_core::instances::lands_toy_path;

fn scs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scs")).args(args).output().expect("run scs binary")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extensive_solve_prints_optimum() {
    let lands = lands_toy_path();
    let out = scs(&["solve", "--instance", path(&lands), "--solver", "extensive"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("f*"), "{text}");
}

#[test]
fn scs_solve_writes_replications_band_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let lands = lands_toy_path();
    let out =
        scs(&["solve", "--instance", path(&lands), "--solver", "scs", "--replications", "3", "--seed", "4", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["rep_0.csv", "rep_1.csv", "rep_2.csv", "band.csv", "summary.toml"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let summary: toml::Table = fs::read_to_string(dir.path().join("summary.toml")).unwrap().parse().unwrap();
    assert_eq!(summary["solver"].as_str(), Some("scs"));
    assert_eq!(summary["replications"].as_integer(), Some(3));
    let band = fs::read_to_string(dir.path().join("band.csv")).unwrap();
    assert!(band.lines().count() > 1);
}

#[test]
fn config_file_overrides_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sgd.toml");
    fs::write(&cfg, "iters = 7\nbatch = 3\n").unwrap();
    let lands = lands_toy_path();
    let out_dir = dir.path().join("out");
    let out = scs(&["solve", "--instance", path(&lands), "--solver", "sgd", "--config", path(&cfg), "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = fs::read_to_string(out_dir.join("rep_0.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 7);
}

#[test]
fn input_errors_exit_with_code_2() {
    let out = scs(&["solve", "--instance", "/nonexistent/problem.txt", "--solver", "scs"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "no_such_knob = 1\n").unwrap();
    let lands = lands_toy_path();
    let out = scs(&["solve", "--instance", path(&lands), "--solver", "scs", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_knob"));
}

#[test]
fn compare_ranks_all_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let lands = lands_toy_path();
    let out = scs(&["compare", "--instance", path(&lands), "--replications", "2", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["scs", "sgd", "smd"] {
        assert!(text.contains(name), "{text}");
    }
    let csv = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("scs"));
}
