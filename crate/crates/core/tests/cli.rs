//! End-to-end tests of the command-line interface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_primecert"))
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/zeros100.txt")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn certify_reference_row_exits_zero() {
    let out = bin()
        .args([
            "certify",
            "--log-x0",
            "46",
            "--params",
            "2,55,2.24285e-13,1.68957e-4,1.04538e8",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["certificate"]["valid"], true);
    let cap = v["certificate"]["delta_cap"].as_str().unwrap();
    assert!(cap.starts_with("29730"), "delta_cap {cap}");
    assert_eq!(v["manifest"]["command"], "certify");
    assert!(v["manifest"]["constants_fingerprint"]
        .as_str()
        .unwrap()
        .len()
        == 64);
}

#[test]
fn certify_negative_margin_exits_two() {
    let out = bin()
        .args([
            "certify",
            "--log-x0",
            "46",
            "--params",
            "2,55,1e-20,1.68957e-4,1.04538e8",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["certificate"]["valid"], false);
}

#[test]
fn certify_parity_violation_exits_one() {
    let out = bin()
        .args([
            "certify",
            "--log-x0",
            "46",
            "--params",
            "3,4,1e-13,1e-4,1.04538e8",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn certify_requires_exactly_one_x0_flag() {
    let out = bin()
        .args(["certify", "--params", "2,55,1e-13,1e-4,1.04538e8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table_which_five_is_usage_error() {
    let out = bin().args(["table", "--which", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn optimize_zero_budget_exits_three() {
    let out = bin()
        .args(["optimize", "--log-x0", "46", "--budget-generations", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn zeros_fixture_t0_20_counts_one() {
    let out = bin()
        .args(["zeros", "--zeros"])
        .arg(fixture())
        .args(["--T0", "20"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["summary"]["n0"], 1);
}

#[test]
fn zeros_coverage_error_exits_one() {
    let out = bin()
        .args(["zeros", "--zeros"])
        .arg(fixture())
        .args(["--T0", "1e12"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_synthetic_power_law_recovers_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    // log Delta = 0.5 log x0 + 6 exactly
    let mut csv = String::from("log_x0,delta\n");
    for lx in [40u32, 60, 80, 100, 120] {
        csv.push_str(&format!("{lx},{:.10e}\n", (0.5 * f64::from(lx) + 6.0).exp()));
    }
    std::fs::write(&path, csv).unwrap();
    let out = bin().args(["fit", "--in"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!((v["slope"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!((v["intercept"].as_f64().unwrap() - 6.0).abs() < 1e-6);
    assert_eq!(v["rows"], 5);
    assert!(v["table"].as_str().unwrap().starts_with("log_x0\t"));
}

#[test]
fn fit_two_rows_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    std::fs::write(&path, "40,1e26\n60,1e36\n").unwrap();
    let out = bin().args(["fit", "--in"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certify_out_file_and_reproducible_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.json");
    let p2 = dir.path().join("b.json");
    for p in [&p1, &p2] {
        let out = bin()
            .env("SOURCE_DATE_EPOCH", "1700000000")
            .args([
                "certify",
                "--log-x0",
                "46",
                "--params",
                "2,55,2.24285e-13,1.68957e-4,1.04538e8",
                "--out",
            ])
            .arg(p)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
}

#[test]
fn certify_log_label_for_first_row() {
    let out = bin()
        .args([
            "certify",
            "--log-x0",
            "log(4e18)",
            "--params",
            "2,47,1.39801e-12,4.71958e-4,1.04538e8",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let cap = v["certificate"]["delta_cap"].as_str().unwrap();
    assert!(cap.starts_with("47716"), "delta_cap {cap}");
}
