//! Binary-level checks: exit codes, report determinism, formats, file
//! output.

use std::path::Path;
use std::process::{Command, Output};

use purity::io;
use purity::qmat::{BipartiteState, DensityMatrix};

fn purity_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_purity"))
}

fn run(args: &[&str]) -> Output {
    purity_bin().args(args).output().expect("binary runs")
}

fn write_state(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn mixed_qubit_json() -> String {
    serde_json::to_string(&io::density_to_file(&DensityMatrix::maximally_mixed(2))).unwrap()
}

fn shared_bit_json() -> String {
    serde_json::to_string(&io::bipartite_to_file(&BipartiteState::common_randomness_bit()))
        .unwrap()
}

#[test]
fn kappa_of_maximally_mixed_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "mixed.json", &mixed_qubit_json());
    let out = run(&["kappa", "--state", &state, "--no-timing"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"][0]["name"], "kappa");
    assert_eq!(report["results"][0]["value"], 0.0);
}

#[test]
fn example1_reports_unit_rate() {
    let out = run(&["example1", "--no-timing"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let results = report["results"].as_array().unwrap();
    assert_eq!(results[0]["name"], "rate");
    assert_eq!(results[0]["value"], 1.0);
    assert_eq!(results[1]["name"], "finalDistance");
    assert_eq!(results[1]["value"], 0.0);
}

#[test]
fn deficit_on_shared_bit() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let out = run(&[
        "deficit", "--state", &state, "--seed", "7", "--restarts", "8", "--no-timing",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = report["results"][0]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() <= 1e-4);
    let ceiling = report["results"][1]["value"].as_f64().unwrap();
    assert!((ceiling - 1.0).abs() <= 1e-9);
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "bad.json", "{\"dims\": [2], \"matrix\": [[");
    let out = run(&["entropy", "--state", &state]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "stderr should carry a location: {err}");
}

#[test]
fn invalid_state_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // trace 2, not a state
    let state = write_state(
        dir.path(),
        "bad.json",
        r#"{"dims": [2], "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}"#,
    );
    let out = run(&["kappa", "--state", &state]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn guard_exceeded_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "mixed.json", &mixed_qubit_json());
    let out = run(&["concentrate", "--state", &state, "--n", "25"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let args = [
        "deficit", "--state", &state, "--seed", "3", "--restarts", "6", "--no-timing",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout, "identical invocations must emit identical bytes");
}

#[test]
fn csv_format_lists_scalar_rows() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let out = run(&["entropy", "--state", &state, "--format", "csv", "--no-timing"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("name,value,bound,tolerance"));
    assert!(text.lines().any(|l| l.starts_with("hA,")));
    assert!(text.lines().any(|l| l.starts_with("iAB,")));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let target = dir.path().join("report.json");
    let out = run(&[
        "entropy",
        "--state",
        &state,
        "--out",
        target.to_str().unwrap(),
        "--no-timing",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(report["command"], "entropy");
}

#[test]
fn distill_subcommand_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let out = run(&[
        "distill", "--state", &state, "--n", "8", "--epsilon", "0.1", "--delta", "0.25",
        "--seed", "7", "--no-timing",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"][0]["name"], "rate");
    assert_eq!(report["results"][0]["value"], 1.0);
    assert_eq!(report["results"][3]["name"], "finalDistance");
    assert_eq!(report["results"][3]["value"], 0.0);
}

#[test]
fn cover_subcommand_on_shared_bit() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let out = run(&[
        "cover", "--state", &state, "--n", "4", "--epsilon", "0.1", "--delta", "0.25",
        "--seed", "7", "--no-timing",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"][0]["name"], "mu");
    assert_eq!(report["results"][0]["value"], 16.0);
    assert_eq!(report["results"][1]["value"], 1.0);
    assert_eq!(report["detail"]["verification"]["bijective"], true);
}

#[test]
fn distill_accepts_povm_file() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    // computational basis written out explicitly
    let povm = write_state(
        dir.path(),
        "povm.json",
        r#"{"vectors": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}"#,
    );
    let out = run(&[
        "distill", "--state", &state, "--n", "4", "--povm", &povm, "--no-timing",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"][0]["value"], 1.0);
}

#[test]
fn kappa1way_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let out = run(&[
        "kappa1way", "--state", &state, "--n", "1", "--seed", "2", "--restarts", "6",
        "--no-timing",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = report["results"][0]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() <= 1e-4);
}

#[test]
fn additivity_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "cr.json", &shared_bit_json());
    let out = run(&[
        "additivity", "--state", &state, "--seed", "1", "--restarts", "2", "--max-iters",
        "60", "--no-timing",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let diff = report["results"][2]["value"].as_f64().unwrap();
    assert!(diff <= 5e-3);
}

#[test]
fn ineq_suite_runs_clean() {
    let out = run(&["ineq-suite", "--seed", "1", "--instances", "50", "--no-timing"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in report["results"].as_array().unwrap() {
        if row["name"].as_str().unwrap().ends_with("_violations") {
            assert_eq!(row["value"], 0.0);
        }
    }
}
