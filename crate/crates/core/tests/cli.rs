use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn loglap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loglap")).args(args).env_remove("LOGLAP_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("loglap-cli-{}-{name}", std::process::id()))
}

const BASE: [&str; 6] = ["--N", "1", "--s", "0.5", "--p", "2"];

fn with_base<'a>(head: &[&'a str]) -> Vec<&'a str> {
    head.iter().copied().chain(BASE).collect()
}

#[test]
fn constants_json() {
    let out = loglap(&with_base(&["constants"]));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["C"].as_f64().unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
    assert!((v["omega_N"].as_f64().unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = loglap(&with_base(&["verify", "frobnicate"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_flag_and_missing_params_exit_2() {
    assert_eq!(loglap(&["constants", "--bogus"]).status.code(), Some(2));
    let out = loglap(&["constants", "--N", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.s"));
    assert_eq!(loglap(&["constants", "--N", "1", "--s", "1.5", "--p", "2"]).status.code(), Some(2));
}

#[test]
fn shape_dimension_mismatch_exits_2() {
    let out = loglap(&["energy", "--N", "2", "--s", "0.5", "--p", "2", "--shape", "interval"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_list_names_every_suite() {
    let out = loglap(&["verify", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> =
        json(&out).as_array().unwrap().iter().map(|e| e["suite"].as_str().unwrap().to_string()).collect();
    for want in ["form-bounds", "poincare", "hardy", "sobolev", "gn", "holder", "diaz-saa", "picone", "pohozaev-defect"] {
        assert!(names.iter().any(|n| n == want), "{want}");
    }
}

#[test]
fn verify_output_is_deterministic() {
    let a = tmp("a.json");
    let b = tmp("b.json");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let mut args = with_base(&["verify", "form-bounds", "--samples", "12", "--seed", "4", "--threads", threads]);
        args.extend(["--output", path.to_str().unwrap()]);
        assert_eq!(loglap(&args).status.code(), Some(0));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["n_samples"], 12);
    for key in ["check", "params", "domain", "worst_margin", "ratios"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn config_file_and_flag_override() {
    let cfg = tmp("cfg.json");
    std::fs::write(&cfg, r#"{"params": {"N": 1, "s": 0.3, "p": 2}, "domain": {"h": 0.01}}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&loglap(&["constants", "--config", c]));
    assert_eq!(v["s"], 0.3);
    let v = json(&loglap(&["constants", "--config", c, "--s", "0.6"]));
    assert_eq!(v["s"], 0.6);
    std::fs::write(&cfg, r#"{"params": {"N": 1}, "colour": 3}"#).unwrap();
    let out = loglap(&["constants", "--config", c]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let _ = std::fs::remove_file(cfg);
}

#[test]
fn study_csv_has_full_precision() {
    let out = loglap(&with_base(&["study", "eigen-mesh", "--h-list", "0.03,0.015,0.0075"]));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "h,n_cells,lambda,abs_increment,residual,converged");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mantissa = row[2].split('e').next().unwrap();
    assert_eq!(mantissa.replace(['.', '-'], "").len(), 17);
}

#[test]
fn eigen_reports_converged_pair() {
    let out = loglap(&with_base(&["eigen", "--h", "0.01", "--restarts", "2"]));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["result"]["lambda"].as_f64().unwrap() > 0.0);
    assert_eq!(v["report"]["pass"], Value::Bool(true));
}

#[test]
fn derivative_across_half_is_rejected_for_p3() {
    let out = loglap(&["op", "--N", "1", "--s", "0.5", "--p", "3", "--study", "derivative"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threshold_diagnostics_go_to_stderr() {
    let out = loglap(&with_base(&["energy", "--paper-thresholds", "--function", "tent"]));
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("e^(B/p)") && err.contains("diam"));
    json(&out);
}
