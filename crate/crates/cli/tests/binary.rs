//! End-to-end runs of the `sketchy` binary: exit codes and outputs.

use std::path::Path;
use std::process::{Command, Output};

use sketchy_cli::io::{encode_binary, save_matrix};
use sketchy_core::DenseMatrix;

fn sketchy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sketchy")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn scree_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    save_matrix(&input, &DenseMatrix::from_diag(3, 3, &[3.0, 2.0, 1.0]), None).unwrap();
    let out = sketchy(&["scree", "--input", path_str(&input)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,scree");
    assert_eq!(lines[1], "0,1.0");
    assert_eq!(lines[4], "3,0.0");
}

#[test]
fn synth_then_approx_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("y.skcm");
    let spec = dir.path().join("spec.json");
    let out = sketchy(&[
        "synth",
        "--preset",
        "yale",
        "--rows",
        "200",
        "--cols",
        "150",
        "--seed",
        "3",
        "-o",
        path_str(&matrix),
        "--write-spec",
        path_str(&spec),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&spec).unwrap().contains("\"spiked\""));

    let json = dir.path().join("run.json");
    let out = sketchy(&[
        "approx",
        "-i",
        path_str(&matrix),
        "-r",
        "3",
        "-p",
        "0.5",
        "--trials",
        "4",
        "--seed",
        "1",
        "--json",
        path_str(&json),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["trials"], 4);
    assert_eq!(report["config"]["k"], 13);
    assert_eq!(report["config"]["s"], 27);
    assert_eq!(report["config"]["q"], 0.5);

    let again = sketchy(&["approx", "-i", path_str(&matrix), "-r", "3", "-p", "0.5", "--trials", "4", "--seed", "1"]);
    let again: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(again["err_per_trial"], report["err_per_trial"]);

    // Same generator, same spec file: the matrix is reproduced exactly.
    let copy = dir.path().join("copy.skcm");
    assert!(sketchy(&["synth", "--spec", path_str(&spec), "-o", path_str(&copy)]).status.success());
    assert!(std::fs::read(&matrix).unwrap() == std::fs::read(&copy).unwrap(), "regenerated matrix differs");
}

#[test]
fn compare_writes_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("m.skcm");
    assert!(sketchy(&["synth", "--preset", "video", "--rows", "160", "--cols", "120", "-o", path_str(&matrix)])
        .status
        .success());
    let csv = dir.path().join("t.csv");
    let out = sketchy(&[
        "compare",
        "-i",
        path_str(&matrix),
        "-r",
        "2",
        "-m",
        "sketchy_core_svd,sketchy_svd,tropp17",
        "--trials",
        "2",
        "--csv",
        path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 1 + 3 * 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    assert_eq!(sketchy(&["scree", "-i", path_str(&missing)]).status.code(), Some(3));

    let bad = dir.path().join("bad.skcm");
    let mut bytes = encode_binary(&DenseMatrix::identity(3));
    bytes.truncate(40);
    std::fs::write(&bad, bytes).unwrap();
    let out = sketchy(&["scree", "-i", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("needs 72 bytes"));

    assert_eq!(sketchy(&["verify", "lemma9"]).status.code(), Some(2));
    assert_eq!(sketchy(&["approx", "-r", "2"]).status.code(), Some(2));

    let small = dir.path().join("s.csv");
    save_matrix(&small, &DenseMatrix::identity(10), None).unwrap();
    let out = sketchy(&["approx", "-i", path_str(&small), "-r", "2", "-p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("violated"));
    let out = sketchy(&["scree", "-i", path_str(&small), "--max-dense", "50"]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(sketchy(&["verify", "lemma7"]).status.code(), Some(0));
    assert_eq!(sketchy(&["verify", "lemma5", "--trials", "10000"]).status.code(), Some(0));
}

#[test]
fn failing_suite_exits_with_one() {
    // A single Monte Carlo draw (seed 0) lands 45% away from the expectation.
    let out = sketchy(&["verify", "lemma5", "--trials", "1", "--seed", "0"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(out.status.code(), Some(1));
}
