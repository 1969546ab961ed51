use std::path::Path;

use ismi_cli::args::OUT_DIR_ENV;
use ismi_cli::manifest::RunManifest;
use ismi_cli::{run, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

fn run_args(args: &[&str]) -> i32 {
    run(std::iter::once("ismi").chain(args.iter().copied()))
}

fn header(csv: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(csv).unwrap();
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(run_args(&["--help"]), EXIT_OK);
    assert_eq!(run_args(&["--version"]), EXIT_OK);
    assert_eq!(run_args(&["sgld", "--help"]), EXIT_OK);
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(run_args(&[]), EXIT_USAGE);
    assert_eq!(run_args(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run_args(&["mean", "--trials", "many"]), EXIT_USAGE);
    assert_eq!(run_args(&["replay", "/nonexistent/manifest.json"]), EXIT_USAGE);
}

#[test]
fn invalid_parameters_fail_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run_args(&["mean", "--n-grid", "1", "--out-dir", out]), EXIT_USAGE);
    assert!(!dir.path().join("mean.csv").exists());
}

#[test]
fn selftest_writes_documented_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run_args(&["selftest", "--trials", "100", "--out-dir", out]), EXIT_OK);
    let manifest = RunManifest::load(&dir.path().join("selftest.manifest.json")).unwrap();
    assert!(manifest.validation.passed);
    assert_eq!(manifest.experiment, "selftest");
    let names: Vec<String> = manifest.columns.iter().map(|c| c.name.clone()).collect();
    assert_eq!(header(&manifest.csv_path), names);
    assert!(manifest.columns.iter().all(|c| !c.description.is_empty()));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(OUT_DIR_ENV, dir.path());
    let code = run_args(&["gp", "--n-grid", "2,4", "--trials", "200"]);
    std::env::remove_var(OUT_DIR_ENV);
    assert!(code == EXIT_OK || code == EXIT_VALIDATION);
    assert!(dir.path().join("gp.csv").exists());
    assert!(dir.path().join("gp.manifest.json").exists());
}

#[test]
fn replay_reproduces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let again = dir.path().join("again");
    let line = ["sgld", "--n-grid", "50", "--epochs", "3", "--trials", "100", "--seed", "9"];
    let mut args: Vec<&str> = line.to_vec();
    args.extend(["--out-dir", first.to_str().unwrap()]);
    assert_eq!(run_args(&args), EXIT_OK);
    let manifest = first.join("sgld.manifest.json");
    assert_eq!(
        run_args(&["replay", manifest.to_str().unwrap(), "--out-dir", again.to_str().unwrap()]),
        EXIT_OK
    );
    let a = std::fs::read(first.join("sgld.csv")).unwrap();
    let b = std::fs::read(again.join("sgld.csv")).unwrap();
    assert_eq!(a, b);
}
