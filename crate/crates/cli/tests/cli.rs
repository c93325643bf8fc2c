use std::process::{Command, Output};

use serde_json::Value;

fn hzlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hzlab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn eval_at_half_shift() {
    let out = hzlab(&["eval", "--f", "1", "--q", "1", "--alpha", "rat:1,2", "--s", "2,0"]);
    assert!(out.status.success());
    let v = json(&out);
    // 3ζ(2) = π²/2
    assert!((v["re"].as_f64().unwrap() - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-11);
    assert_eq!(v["im"].as_f64().unwrap(), 0.0);
}

#[test]
fn eval_high_precision_string() {
    let out = hzlab(&["--precision", "hp:30", "eval", "--f", "1", "--alpha", "rat:1,2", "--s", "2,0"]);
    assert!(out.status.success());
    let hp = json(&out)["hp"].as_str().unwrap().to_string();
    assert!(hp.starts_with("4.93480220054467930941724549993"), "{hp}");
}

#[test]
fn annulus_radii() {
    let out = hzlab(&["annulus", "radii", "--r", "1,2,5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["R"].as_f64(), Some(8.0));
    assert_eq!(v["T"].as_f64(), Some(2.0));
}

#[test]
fn annulus_realize_negative_target() {
    let out = hzlab(&["annulus", "realize", "--r", "1,2,2.5", "--z", "-1.5,0.5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["sum"]["re"].as_f64().unwrap() + 1.5).abs() < 1e-9);
    assert!((v["sum"]["im"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn bad_flag_is_a_usage_error() {
    let out = hzlab(&["annulus", "radii", "--r", "1,2", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn mismatched_period_is_a_config_error() {
    let out = hzlab(&["eval", "--f", "1,2", "--q", "3", "--alpha", "rat:1,2", "--s", "2,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_failure_reports_json() {
    // residue zero: no truncation index exists
    let out = hzlab(&["twist", "sign-flip", "--f", "1,-1", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["stage"], "truncation");
}

#[test]
fn kron_solve_single_frequency() {
    let out = hzlab(&["kron", "solve", "--freqs", "0.5", "--targets", "0.25", "--delta", "0.05", "--tmin", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["t"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(v["max_error"].as_f64().unwrap() < 0.05);
}

#[test]
fn ideals_factor_records() {
    let out = hzlab(&["--format", "jsonl", "ideals", "factor", "--alpha", "quad:0,1,2", "--n", "3,17"]);
    assert!(out.status.success());
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["norm"], "7");
    assert_eq!(lines[1]["norm"], "287");
}

#[test]
fn cassels_csv() {
    let out = hzlab(&["--format", "csv", "ideals", "cassels", "--N", "100", "--M", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,witness,witnesses"));
}

#[test]
fn greedy_writes_one_line_per_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.jsonl");
    let out = hzlab(&[
        "--format",
        "jsonl",
        "--out",
        path.to_str().unwrap(),
        "twist",
        "greedy",
        "--alpha",
        "quad:0,1,2",
        "--blocks",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3]["outcome"]["status"], "completed");
}

#[test]
fn zeros_count_zeta() {
    let out = hzlab(&["zeros", "count", "--alpha", "rat:1,1", "--rect", "1.1,2,0,30"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["count"], 0);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": {"annulus": {"radii": {"r": [1, 2, 5]}}}, "format": "json"}"#).unwrap();
    let out = hzlab(&["--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["T"].as_f64(), Some(2.0));

    std::fs::write(&cfg, r#"{"command": {"annulus": {"radii": {"r": [1]}}}, "colour": "red"}"#).unwrap();
    assert_eq!(hzlab(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["--seed", "7", "ideals", "cassels", "--N", "200", "--M", "5"];
    assert_eq!(hzlab(&args).stdout, hzlab(&args).stdout);
}
