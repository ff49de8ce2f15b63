//! End-to-end runs of the `carlitz` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carlitz"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn goss_three_is_x_cubed() {
    let o = run(&["compute", "goss", "3", "--format", "text"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "X^3");
    let v = json(&run(&["compute", "goss", "4"], &[]));
    assert_eq!(v["result"]["poly"], "X^4 + ((1)/(theta^3 + 2*theta))*X^2");
    assert_eq!(v["params"]["p"], 3);
}

#[test]
fn bernoulli_at_q_variables_is_one() {
    let o = run(&["compute", "bernoulli", "s{1,2,3}", "--p", "3", "--e", "1", "--format", "text"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1");
    // --vars is the fallback for Σ
    let o = run(&["compute", "bernoulli", "--vars", "1,2,3", "--format", "text"], &[]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn pitilde_leading_exponent() {
    let v = json(&run(&["compute", "pitilde", "--prec", "10"], &[]));
    assert_eq!(v["result"]["valuation"], "-3/2");
    let v = json(&run(&["compute", "pitilde", "--prec", "10", "--p", "2"], &[]));
    assert_eq!(v["result"]["valuation"], "-2");
}

#[test]
fn zeta_and_phi_targets() {
    let v = json(&run(&["compute", "zeta", "[(s{1};1)]", "--prec", "4"], &[]));
    assert_eq!(v["result"]["array"], "[(s{1};1)]");
    assert_eq!(v["result"]["value"]["valuation"], "0");
    let v = json(&run(&["compute", "phi", "[(1;1)]", "--u-prec", "10"], &[]));
    assert_eq!(v["result"]["uprec"], 10);
    let v = json(&run(&["compute", "eisenstein", "1", "s{1}", "--u-prec", "10"], &[]));
    assert_eq!(v["result"]["vars"], serde_json::json!([1]));
    let v = json(&run(&["compute", "omega", "1", "--prec", "3"], &[]));
    assert_eq!(v["result"]["valuation"], "-1/2");
}

#[test]
fn verify_harmonic_passes() {
    let o = run(&["verify", "harmonic", "--p", "3", "--dmax", "3"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["suite"], "harmonic");
    assert_eq!(v["passed"], true);
    for key in ["p", "e", "prec", "uprec"] {
        assert!(v["params"].get(key).is_some(), "{key}");
    }
    assert!(v["suite_version"].is_string());
}

#[test]
fn verify_all_passes_for_q_two() {
    let o = run(&["verify", "all", "--p", "2"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let items = v["items"].as_array().unwrap();
    assert!(items.len() > 10);
    assert!(items.iter().all(|i| i["status"] == "pass"));
}

#[test]
fn conj_e_is_flagged() {
    let v = json(&run(&["verify", "conjE", "--p", "3"], &[]));
    let items = v["items"].as_array().unwrap();
    assert!(!items.is_empty());
    assert!(items.iter().all(|i| i["conjecture_evidence"] == true));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["verify", "small_sigma"], &[]);
    let b = run(&["verify", "small_sigma"], &[]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("wall_time"));
    let t = run(&["verify", "small_sigma", "--timings"], &[]);
    assert!(stdout(&t).contains("wall_time"));
}

#[test]
fn environment_overrides() {
    let o = run(&["compute", "goss", "3", "--format", "text"], &[("CARLITZ_P", "2")]);
    assert_eq!(stdout(&o).trim(), "X^3 + ((1)/(theta^2 + theta))*X^2");
    let v = json(&run(&["compute", "goss", "2"], &[("CARLITZ_U_PREC", "5")]));
    assert_eq!(v["params"]["uprec"], 5);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["verify", "nonexistent"], &[]).status.code(), Some(2));
    assert_eq!(run(&["compute", "goss", "x"], &[]).status.code(), Some(2));
    assert_eq!(run(&["compute", "goss", "2", "--p", "4"], &[]).status.code(), Some(2));
    assert_eq!(run(&["compute", "zeta", "[(1;0)]"], &[]).status.code(), Some(2));
    // recognition of 𝔹_Σ needs θ-precision at least m q
    assert_eq!(run(&["compute", "bernoulli", "s{1,2,3}", "--prec", "2"], &[]).status.code(), Some(3));
}
