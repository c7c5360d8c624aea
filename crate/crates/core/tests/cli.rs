use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use holevo_limits::cli::{matrix_from_json, matrix_to_json, Cli, ExperimentConfig, MANIFEST, OUTPUT_DIR_ENV};
use holevo_limits::linalg::{c, CMatrix};
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_holevo-limits"));
    cmd.env_remove(OUTPUT_DIR_ENV);
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

#[test]
fn noon_asymmetry_is_one_bit() {
    let out = run(&["asymmetry", "--state", "noon", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["results"]["asymmetry"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert_eq!(r["holds"], true);
    assert_eq!(r["inputs"]["n"], 5);
    assert_eq!(r["tolerances"]["check"], 1e-9);
}

#[test]
fn mub_sweep_passes() {
    let out = run(&["eur-sweep", "--pair", "mub", "--dim", "8", "--samples", "1000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["min_slack"].as_f64().unwrap() >= -1e-9);
    assert_eq!(r["results"]["samples"], 1000);
    assert_eq!(r["violation_seed"], Value::Null);
}

#[test]
fn every_pair_sweeps() {
    for (pair, dim) in [("number-phase", "6"), ("qp", "9"), ("degenerate", "6"), ("oscillator", "5"), ("almost-periodic", "3")] {
        let out = run(&["eur-sweep", "--pair", pair, "--dim", dim, "--samples", "8", "--grid", "32", "--time-samples", "4000"]);
        assert_eq!(out.status.code(), Some(0), "{pair}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn csv_rows_match_samples() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = run(&["eur-sweep", "--pair", "number-phase", "--samples", "12", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "seed,d,M,slack");
    assert_eq!(lines.len(), 13);
    assert!(lines[1].split(',').nth(2) == Some("64"));
}

#[test]
fn malformed_config_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"experiment\": {\"eur-sweep\": {\n  \"pair\": \"mub\",\n  \"dim\": \"eight\"}}}").unwrap();
    let out = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("experiment.eur-sweep.dim"), "{err}");

    std::fs::write(&path, "{\"experiment\": {\"mow-check\": {\"dist\": \"uniform\", \"dd\": 3}}}").unwrap();
    let out = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `dd`"));
}

#[test]
fn bad_parameters_exit_one() {
    assert_eq!(run(&["eur-sweep", "--pair", "qp", "--dim", "8", "--samples", "2"]).status.code(), Some(1));
    assert_eq!(run(&["chi", "--source", "file", "--file", "/nonexistent/ensemble.json"]).status.code(), Some(1));
    assert_eq!(run(&["asymmetry", "--group", "so3", "--state", "noon"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn violation_exits_two_with_seed() {
    // A negative tolerance demands a margin no sample has.
    let out = run(&["eur-sweep", "--pair", "mub", "--dim", "4", "--samples", "20", "--seed", "11", "--tolerance", "-5"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    let seed = r["violation_seed"].as_u64().unwrap();
    assert_eq!(r["holds"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains(&seed.to_string()));
}

#[test]
fn config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": {"phase-sim": {"probe": "noon", "n": 3, "grid": 64}}}"#).unwrap();
    let from_config = run(&["run", "--config", cfg.to_str().unwrap()]);
    let from_flags = run(&["phase-sim", "--probe", "noon", "--n", "3", "--grid", "64"]);
    assert_eq!(from_config.status.code(), Some(0));
    assert_eq!(from_config.stdout, from_flags.stdout);
}

fn report_file(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.extend(["--out", &p]);
    let out = run(&all);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["eur-sweep", "--pair", "number-phase", "--dim", "6", "--samples", "200", "--seed", "5"],
        &["phase-sim", "--probe", "random", "--dim", "5", "--grid", "128", "--seed", "9"],
        &["mutual-info", "--source", "random", "--measurement", "random", "--seed", "2"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let mut a1 = args.to_vec();
        a1.extend(["--threads", "1"]);
        let mut a8 = args.to_vec();
        a8.extend(["--threads", "8"]);
        let first = report_file(dir.path(), &format!("{k}-a.json"), &a1);
        let second = report_file(dir.path(), &format!("{k}-b.json"), &a1);
        let eight = report_file(dir.path(), &format!("{k}-c.json"), &a8);
        assert_eq!(first, second);
        assert_eq!(first, eight);
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().env(OUTPUT_DIR_ENV, dir.path().join("nested")).args(["mow-check", "--dist", "geometric"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_slice(&std::fs::read(dir.path().join("nested/mow-check.json")).unwrap()).unwrap();
    assert_eq!(r["command"], "mow-check");
    // No stray temporary files are left behind.
    assert_eq!(std::fs::read_dir(dir.path().join("nested")).unwrap().count(), 1);
}

#[test]
fn ensemble_file_round_trip() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [[1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]];
    let states: Vec<_> = kets
        .iter()
        .map(|k| matrix_to_json(&CMatrix::from_fn(2, 2, |a, b| c(k[a] * k[b], 0.0))))
        .collect();
    let povm = vec![
        matrix_to_json(&CMatrix::from_fn(2, 2, |a, b| c(if a == 0 && b == 0 { 1.0 } else { 0.0 }, 0.0))),
        matrix_to_json(&CMatrix::from_fn(2, 2, |a, b| c(if a == 1 && b == 1 { 1.0 } else { 0.0 }, 0.0))),
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bb84.json");
    std::fs::write(&path, serde_json::json!({ "states": states, "povm": povm }).to_string()).unwrap();
    let p = path.to_str().unwrap();

    let chi = report(&run(&["chi", "--source", "file", "--file", p]));
    assert!((chi["results"]["chi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let mi = report(&run(&["mutual-info", "--source", "file", "--measurement", "file", "--file", p]));
    assert!((mi["results"]["mutual_information"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(mi["results"]["ensemble"]["states"][2][1], serde_json::json!([0.5000000000000001, 0.0]));
}

#[test]
fn complex_matrices_are_row_major_pairs() {
    let m = CMatrix::from_fn(2, 2, |a, b| c(a as f64, b as f64));
    let entries = matrix_to_json(&m);
    assert_eq!(entries, vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
    assert_eq!(matrix_from_json(&entries).unwrap(), m);
    assert!(matrix_from_json(&entries[..3]).is_err());
}

#[test]
fn manifest_commands_all_parse() {
    let entries: Vec<Value> = serde_json::from_str(MANIFEST).unwrap();
    assert!(entries.len() >= 10);
    let listing = String::from_utf8(run(&["--list-experiments"]).stdout).unwrap();
    for e in &entries {
        let command = e["command"].as_str().unwrap();
        assert!(listing.contains(command));
        let args = std::iter::once("holevo-limits").chain(command.split_whitespace());
        assert!(Cli::try_parse_from(args).is_ok(), "{command}");
    }
}

#[test]
fn config_defaults_follow_flags() {
    let cfg = ExperimentConfig::from_json(r#"{"experiment": {"eur-sweep": {}}}"#).unwrap();
    let json = serde_json::to_value(&cfg.experiment).unwrap();
    assert_eq!(json["eur-sweep"]["dim"], 8);
    assert_eq!(json["eur-sweep"]["grid"], 64);
    assert_eq!(json["eur-sweep"]["pair"], "mub");
}
