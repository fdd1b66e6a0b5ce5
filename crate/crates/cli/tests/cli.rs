use std::process::{Command, Output};

use serde_json::Value;

fn gmoments(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmoments"))
        .args(args)
        .env_remove("GMOMENTS_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn seq_factorial_squared() {
    let out = gmoments(&["seq", "--family", "factorial", "--t", "2", "--n", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["command"], "seq");
    let log_mu = v["results"]["log_mu"].as_array().unwrap();
    assert_eq!(log_mu.len(), 6);
    // (5!)^2 = 120^2
    let mu5 = num(&log_mu[5]).exp();
    assert!((mu5 - 14400.0).abs() / mu5 < 1e-13);
}

#[test]
fn seq_golden_bytes() {
    let out = gmoments(&["seq", "--family", "factorial", "--t", "2", "--n", "3"]);
    let expected = r#"{
  "command": "seq",
  "inputs": {
    "family": "factorial",
    "n": 3,
    "t": 2.0000000000000000e0
  },
  "results": {
    "family": "factorial",
    "log_mu": [
      0.0000000000000000e0,
      0.0000000000000000e0,
      1.3862943611198906e0,
      3.5835189384561099e0
    ],
    "n_max": 3,
    "params": {
      "t": 2.0000000000000000e0
    }
  },
  "tool_version": "0.1.0",
  "warnings": []
}
"#;
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn classify_rgstable_mi() {
    let out = gmoments(&["classify", "--family", "rgstable", "--a", "1", "--m", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["results"]["verdict"], "MI");
    let ev = v["results"]["evidence"].as_array().unwrap();
    assert!(ev.iter().any(|e| e["criterion"] == "rgstable_rule" && e["side"] == "MI"));
}

#[test]
fn classify_factorial_threshold() {
    let md = json_of(&gmoments(&["classify", "--family", "factorial", "--t", "2"]));
    let mi = json_of(&gmoments(&["classify", "--family", "factorial", "--t", "3"]));
    assert_eq!(md["results"]["verdict"], "MD");
    assert_eq!(mi["results"]["verdict"], "MI");
}

#[test]
fn verify_malmsten_gamma() {
    let out = gmoments(&["verify", "--identity", "malmsten_gamma", "--s", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!(num(&v["results"]["residual"]) <= 1e-8);
}

#[test]
fn verify_other_identities() {
    for args in [
        vec!["verify", "--identity", "malmsten_beta", "--a", "1", "--b", "2", "--s", "0.5", "--lambda", "3"],
        vec!["verify", "--identity", "mt_exponent", "--t", "2", "--s", "1.5"],
        vec!["verify", "--identity", "logphi_repr", "--phi", "power", "--alpha", "0.5", "--lambda", "4"],
    ] {
        let out = gmoments(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(num(&json_of(&out)["results"]["residual"]) <= 1e-8, "{args:?}");
    }
}

#[test]
fn density_csv_header_and_thread_invariance() {
    let base = ["density", "--target", "L_t", "--t", "1", "--x-min", "0.1", "--x-max", "10", "--points", "40", "--format", "csv"];
    let one = gmoments(&base);
    assert_eq!(one.status.code(), Some(0));
    let text = String::from_utf8(one.stdout.clone()).unwrap();
    assert!(text.starts_with("x,f,err\n"));
    assert_eq!(text.lines().count(), 41);
    // f_1(x) = e^{-x}
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((row[1] - (-row[0]).exp()).abs() < 1e-11);

    let mut four: Vec<&str> = base.to_vec();
    four.extend(["--threads", "4"]);
    assert_eq!(gmoments(&four).stdout, one.stdout);
}

#[test]
fn density_json_inputs_skip_threads() {
    let out = gmoments(&["density", "--target", "M_t", "--t", "0.5", "--threads", "2", "--diagnostics"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!(v["inputs"].get("threads").is_none());
    assert!(v["inputs"].get("format").is_none());
    assert!((num(&v["results"]["diagnostics"]["mass"]) - 1.0).abs() < 1e-5);
}

#[test]
fn deterministic_runs() {
    let args = ["id", "--family", "mt", "--t", "2", "--t-grid", "0.5,1.5", "--max-size", "4"];
    let a = gmoments(&args);
    let b = gmoments(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_of(&a)["results"]["probe"]["all_pass"], true);
}

#[test]
fn csv_for_non_tabular_is_format_error() {
    let out = gmoments(&["classify", "--family", "factorial", "--t", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "format");
}

#[test]
fn usage_errors_exit_two() {
    let out = gmoments(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = gmoments(&["seq", "--family", "factorial", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "usage");
}

#[test]
fn numeric_flags_range_checked() {
    for args in [
        vec!["seq", "--family", "beta", "--a", "-1", "--b", "1"],
        vec!["seq", "--family", "factorial", "--t", "nan"],
        vec!["density", "--target", "L_t", "--t", "1", "--tol", "0.5"],
        vec!["id", "--family", "factorial", "--max-size", "13"],
    ] {
        assert_eq!(gmoments(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn validation_errors_carry_payload() {
    let out = gmoments(&["seq", "--family", "rgstable", "--a", "2", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "rgstable_undefined");

    let out = gmoments(&["seq", "--family", "beta", "--a", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "validation");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"family": "factorial", "t": 3, "n": 2}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = json_of(&gmoments(&["seq", "--config", cfg]));
    assert_eq!(num(&from_file["results"]["params"]["t"]), 3.0);
    assert_eq!(from_file["results"]["n_max"], 2);

    let overridden = json_of(&gmoments(&["seq", "--config", cfg, "--t", "2"]));
    assert_eq!(num(&overridden["results"]["params"]["t"]), 2.0);
}

#[test]
fn output_file_relative_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gmoments"))
        .args(["seq", "--family", "mt", "--t", "0.5", "--n", "4", "--format", "csv", "--output", "mt.csv"])
        .env("GMOMENTS_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("mt.csv")).unwrap();
    assert!(text.starts_with("n,log_mu\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn bernstein_and_kp16() {
    let v = json_of(&gmoments(&["bernstein", "--family", "gamma1", "--a", "2", "--s", "1"]));
    assert_eq!(v["results"]["is_bernstein"], true);
    assert_eq!(v["results"]["factorization"]["pass"], true);

    let v = json_of(&gmoments(&["bernstein", "--family", "rgstable", "--a", "1", "--m", "0.5"]));
    assert_eq!(v["command"], "bernstein");

    // Beta(1, 1): Γ(1+n)/Γ(2+n) = 1/(n+1), the uniform law
    let v = json_of(&gmoments(&["kp16", "--num", "1:1", "--den", "2:1"]));
    assert_eq!(v["results"]["verdict"], true);
}
