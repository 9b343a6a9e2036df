use std::process::{Command, Output};

use tritter_core::io::parse_cm_json;
use tritter_core::{ideal_output_cm, CovarianceMatrix};

fn tritter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tritter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = tritter(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    tritter(args).status.code().unwrap()
}

/// `measure -> numeric` from a measures CSV.
fn numeric(csv: &str, id: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{id},")))
        .and_then(|rest| rest.split(',').next())
        .unwrap_or_else(|| panic!("{id} missing"))
        .parse()
        .unwrap()
}

fn cm_json(args: &[&str]) -> CovarianceMatrix {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    parse_cm_json(&stdout(&all)).unwrap()
}

#[test]
fn zero_squeezing_gives_vacuum() {
    assert_eq!(cm_json(&["cm", "--lambda", "0"]), CovarianceMatrix::vacuum(3));
}

#[test]
fn full_loss_gives_vacuum() {
    assert_eq!(
        cm_json(&["cm", "--lambda", "0.5", "--scenario", "5", "--T", "0"]),
        CovarianceMatrix::vacuum(3)
    );
}

#[test]
fn gamma_does_not_change_the_matrix() {
    for via in ["transform", "closed-form"] {
        let a = stdout(&["cm", "--lambda", "0.5", "--gamma", "2+3i", "--via", via]);
        let b = stdout(&["cm", "--lambda", "0.5", "--gamma", "0", "--via", via]);
        assert_eq!(a, b);
    }
    let a = stdout(&["measures", "--lambda", "0.5", "--gamma", "2+3i", "--format", "json"]);
    let b = stdout(&["measures", "--lambda", "0.5", "--format", "json"]);
    assert_eq!(a, b);
}

#[test]
fn transform_path_matches_closed_form() {
    let v = cm_json(&["cm", "--lambda", "0.7", "--via", "transform"]);
    assert!(v.max_abs_diff(&ideal_output_cm(0.7).unwrap()) < 1e-10);
    let r = cm_json(&["cm", "--r", "0.5"]);
    assert!(r.max_abs_diff(&ideal_output_cm(0.5f64.tanh()).unwrap()) < 1e-12);
}

#[test]
fn ideal_measures() {
    let csv = stdout(&[
        "measures",
        "--lambda",
        "0.5",
        "--ideal",
        "--measures",
        "all,S:c->ab,S:ab->c",
    ]);
    assert_eq!(numeric(&csv, "S:a->b"), 0.0);
    let s1 = numeric(&csv, "S:c->ab");
    let s2 = numeric(&csv, "S:ab->c");
    assert!(s1 > 0.0);
    assert!((s1 - s2).abs() < 1e-12);
    assert_eq!(numeric(&csv, "S:k->ij"), s1);
    assert!(!csv.contains("MISMATCH"));
    assert!(csv.lines().any(|l| l == "region,,,,I,"));
}

#[test]
fn no_squeezing_no_correlations() {
    let csv = stdout(&["measures", "--lambda", "0", "--ideal"]);
    for line in csv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("E:") || l.starts_with("S:"))
    {
        assert_eq!(line.split(',').nth(1), Some("0"), "{line}");
    }
}

#[test]
fn below_scenario_one_threshold() {
    let csv = stdout(&[
        "measures",
        "--lambda",
        "0.5",
        "--scenario",
        "1",
        "--T",
        "0.4",
        "--measures",
        "S:k->ij,S:ij->k",
    ]);
    assert_eq!(numeric(&csv, "S:k->ij"), 0.0);
    assert_eq!(numeric(&csv, "S:ij->k"), 0.0);
}

#[test]
fn explicit_ids_are_accepted() {
    let csv = stdout(&[
        "measures",
        "--lambda",
        "0.5",
        "--measures",
        "S:c->ab,S:ab->c,E:a|b@s3",
        "--scenario",
        "3",
        "--T",
        "0.6",
    ]);
    assert!(csv.contains("\nE:a|b@s3,"));
}

#[test]
fn sweep_writes_file_with_both_t_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s5.csv");
    let p = path.to_str().unwrap();
    let args = [
        "sweep",
        "--vary",
        "t",
        "--lambda",
        "0.5",
        "--scenario",
        "5",
        "--measures",
        "S:k->ij,S:ij->k",
        "--out",
        p,
    ];
    assert_eq!(code(&args), 0);
    let first = std::fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = first.lines().next().unwrap().split(',').collect();
    assert_eq!(&header[..5], &["T", "S:ij->k", "S:k->ij", "lambda", "1-T"]);
    assert_eq!(first.lines().count(), 102);
    for line in first.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').take(3).map(|c| c.parse().unwrap()).collect();
        if cells[0] < 0.6 {
            assert_eq!(cells[1], 0.0, "{line}");
            assert_eq!(cells[2], 0.0, "{line}");
        }
    }
    assert_eq!(code(&args), 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
}

#[test]
fn lambda_sweep_json() {
    let out = stdout(&[
        "sweep",
        "--vary",
        "lambda",
        "--measures",
        "E:pair,E:1v2",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["kind"], "sweep");
    assert_eq!(v["body"]["rows"].as_array().unwrap().len(), 20);
}

#[test]
fn thresholds_table() {
    let csv = stdout(&["thresholds", "--lambdas", "0.5", "--scenarios", "1,2"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "scenario,lambda,measure,threshold,stated,diff");
    assert!(lines.contains(&"2,0.5,S:ij->k,always,,"));
    let s1: f64 = lines
        .iter()
        .find(|l| l.starts_with("1,0.5,S:ij->k,"))
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((s1 - 0.5).abs() < 1e-9);
}

#[test]
fn single_verify_check() {
    assert_eq!(code(&["verify", "--check", "1"]), 0);
    let out = stdout(&["verify", "--check", "9", "--format", "json"]);
    assert!(out.contains("\"kind\": \"verify\""));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["cm"],
        vec!["cm", "--lambda", "0.5", "--r", "0.3"],
        vec!["cm", "--lambda", "1.0"],
        vec!["cm", "--lambda", "0.5", "--scenario", "6", "--T", "0.5"],
        vec!["cm", "--lambda", "0.5", "--scenario", "2"],
        vec!["cm", "--lambda", "0.5", "--T", "0.5"],
        vec!["cm", "--lambda", "0.5", "--T1", "1.5"],
        vec!["cm", "--lambda", "0.5", "--gamma", "2+3j"],
        vec!["measures", "--lambda", "0.5", "--measures", "X:pair"],
        vec!["measures", "--lambda", "0.5", "--k", "a", "--lossy-member", "a"],
        vec!["sweep", "--vary", "t", "--lambda", "0.5"],
        vec![
            "sweep",
            "--vary",
            "t",
            "--lambda",
            "0.5",
            "--scenario",
            "1",
            "--step",
            "0",
        ],
        vec!["thresholds", "--lambdas", "0.5,x"],
        vec!["bogus"],
    ] {
        assert_eq!(code(&args), 1, "{args:?}");
    }
    assert_eq!(code(&["--help"]), 0);
}
