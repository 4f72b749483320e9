use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn dpw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpw")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dpw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gamma_order_two_at_lambda_one() {
    let out = dpw(&["gamma", "--n", "3", "--order", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let g: Vec<f64> = serde_json::from_value(v["data"]["gammas"].clone()).unwrap();
    let expected = [0.0, 2.0, 5f64.sqrt()];
    for (a, b) in g.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{g:?}");
    }
    for c in v["checks"].as_array().unwrap() {
        for key in ["check", "paper_ref", "value", "expected", "tol", "pass", "source"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn gamma_without_real_solution_fails_unless_report_only() {
    let out = dpw(&["gamma", "--n", "2", "--order", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["checks"][0]["pass"], Value::Bool(false));
    let out = dpw(&["gamma", "--n", "2", "--order", "3", "--report-only"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn eval_first_order_series_matches_closed_form() {
    let path = scratch("eval1.csv");
    let out = dpw(&["eval", "--n", "3", "--order", "1", "--rho", "0.5", "--grid", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["theta1", "theta2", "value_series", "value_closed"]);
    let mut count = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (s, c): (f64, f64) = (rec[2].parse().unwrap(), rec[3].parse().unwrap());
        assert!((s - c).abs() < 1e-10);
        count += 1;
    }
    assert_eq!(count, 36);
    let mut side = path.into_os_string();
    side.push(".json");
    let report: Value = serde_json::from_slice(&std::fs::read(side).unwrap()).unwrap();
    assert!(report["data"]["max_abs_diff"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["config"]["rho"], 0.5);
}

#[test]
fn eval_order_zero_is_zonal() {
    let out = dpw(&["eval", "--n", "2", "--order", "0", "--grid", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    for chunk in rows.chunks(5) {
        for r in chunk {
            assert!((r[2] - chunk[0][2]).abs() < 1e-12 * chunk[0][2].abs().max(1.0));
        }
    }
}

#[test]
fn eval_below_cap_threshold_exits_three() {
    let out = dpw(&["eval", "--n", "5", "--order", "2", "--rho", "1e-4", "--grid", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn verify_first_order_on_s2() {
    let out = dpw(&["verify", "--n", "2", "--order", "1", "--band", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 80);
    assert!(checks.iter().all(|c| c["pass"] == Value::Bool(true)));
    let rows = v["data"]["rows"].as_array().unwrap();
    for r in rows {
        let ratio = r["quadrature"].as_f64().unwrap() / r["dimension"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 1e-6);
    }
}

#[test]
fn transform_round_trip_reports_error() {
    let out = dpw(&["transform", "--band", "4", "--rho-steps", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    let err = v["data"]["rel_l2_error"].as_f64().unwrap();
    assert!(err < 1e-3, "{err}");
    assert_eq!(v["config"]["rho_min"], 1e-6);
}

#[test]
fn transform_requires_s2() {
    assert_eq!(dpw(&["transform", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn limit_probe_converges() {
    let out = dpw(&["limit", "--n", "3", "--order", "2", "--xi", "0.3,-0.4,0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json_of(&out);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["check"].as_str().unwrap().contains("tabulated")));
    let errors: Vec<f64> = serde_json::from_value(v["data"]["errors"].clone()).unwrap();
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn outputs_are_deterministic() {
    let a = dpw(&["coeffs", "--n", "4", "--order", "2", "--rho", "0.7"]);
    let b = dpw(&["coeffs", "--n", "4", "--order", "2", "--rho", "0.7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let a = dpw(&["transform", "--band", "3", "--rho-steps", "20", "--report-only"]);
    let b = dpw(&["transform", "--band", "3", "--rho-steps", "20", "--report-only"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(dpw(&["nonsense"]).status.code(), Some(2));
    assert_eq!(dpw(&["eval", "--n", "1"]).status.code(), Some(2));
    assert_eq!(dpw(&["eval", "--rho", "-1"]).status.code(), Some(2));
    assert_eq!(dpw(&["limit", "--xi", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn checks_as_csv() {
    let out = dpw(&["gamma", "--n", "4", "--order", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,paper_ref,value,expected,tol,pass,source"));
}
