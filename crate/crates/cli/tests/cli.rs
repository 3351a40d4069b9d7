//! End-to-end CLI tests: output shapes, exit codes, determinism, and the
//! scenario round trip.

use std::process::{Command, Output};

fn carlitz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carlitz")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_frobhgf_exact() {
    let out = carlitz(&["verify", "frobhgf", "--q", "3", "--a", "1,1", "--b", "2", "--alpha", "1", "--cutoff", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["result"]["defect"], "0");
    assert_eq!(json["result"]["exact"], true);
}

#[test]
fn stuffle_three_terms() {
    let out = carlitz(&["stuffle", "--s1", "1", "--s2", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["result"]["count"], 3);
}

#[test]
fn profile_zero_c_table() {
    let out = carlitz(&["profile", "--a", "1,2", "--b", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    let c = json["result"]["c"].as_object().unwrap();
    assert!(c.values().all(|v| v == 0));
    assert_eq!(json["result"]["negative_sites"].as_array().unwrap().len(), 0);
}

#[test]
fn syntax_error_is_exit_2() {
    let out = carlitz(&["eval-thgf", "--a", "1,1", "--b", "2", "--alpha", "theta^^2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("column 7"), "{}", err);
}

#[test]
fn unknown_usage_is_exit_2() {
    let out = carlitz(&["verify", "frobhgf", "--a", "2,1", "--b", "2", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(2), "unsorted parameters are a usage error");
}

#[test]
fn depth_cap_is_exit_3() {
    let out = carlitz(&["verify", "hg-ode", "--q", "2", "--a", "3", "--depth-cap", "1", "--cutoff", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failed_hypothesis_is_exit_1() {
    // |θ| = q fails the disc bound for (1,1;2)
    let out = carlitz(&["hypotheses", "--theorem", "3.4", "--a", "1,1", "--b", "2", "--alpha", "theta"]);
    assert_eq!(out.status.code(), Some(1));
    let json = stdout_json(&out);
    assert_eq!(json["result"]["overall"], "fail");
}

#[test]
fn hypotheses_hold_is_exit_0() {
    let out = carlitz(&["hypotheses", "--theorem", "4.5", "--s", "1,1", "--alpha", "1,1", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["result"]["overall"], "hypotheses-hold");
    assert!(json["result"]["asserted-by-citation"][0].as_str().unwrap().contains("independent"));
}

#[test]
fn value_commands_are_deterministic() {
    let run = || carlitz(&["eval-mpl", "--q", "2", "--s", "1,1", "--alpha", "1,1", "--precision", "30"]);
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn suite_runs_twice_byte_identical() {
    let a = carlitz(&["suite"]);
    let b = carlitz(&["suite"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "suite output must be byte-identical across runs");
    let json = stdout_json(&a);
    assert_eq!(json["result"]["all_passed"], true);
}

#[test]
fn scenario_round_trip_through_json_file() {
    let with_flags = carlitz(&[
        "classify", "--a", "1,1", "--b", "2", "--q", "9", "--depth", "1", "--cutoff", "6",
        "--precision", "44",
    ]);
    assert_eq!(with_flags.status.code(), Some(0));
    let json = stdout_json(&with_flags);
    let scenario = &json["scenario"];
    // write the echoed scenario and rerun with --json only
    let dir = std::env::temp_dir().join(format!("carlitz-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scenario.json");
    std::fs::write(&path, serde_json::to_string(scenario).unwrap()).unwrap();
    let from_file = carlitz(&["classify", "--a", "1,1", "--b", "2", "--json", path.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(with_flags.stdout, from_file.stdout, "scenario file reproduces the run");
    // and the scenario itself round-trips bit-identically
    let reparsed: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(scenario).unwrap()).unwrap();
    assert_eq!(&reparsed, scenario);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn motive_build_matches_explicit_matrix() {
    let out = carlitz(&["motive", "build", "--kind", "thgf", "--a", "1,1", "--b", "2", "--alpha", "theta", "--d", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    let phi = &json["result"]["phi"];
    // (2,1) entry is (-1)^1·θ = 2θ for s = 1, q = 3
    assert_eq!(phi[1][0]["num"], "2*theta");
    // diagonal is (t-θ) = t + 2θ
    assert_eq!(phi[0][0]["num"], "t+2*theta");
    assert_eq!(json["result"]["shift"]["offset"], 1);
}

#[test]
fn eval_mpl_star_flag() {
    let out = carlitz(&["eval-mpl", "--q", "2", "--s", "1,1", "--alpha", "1,1", "--star", "--precision", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert!(json["result"]["nonvanishing_certified"].as_bool().unwrap());
}

#[test]
fn extension_field_modulus_flag() {
    let out = carlitz(&["verify", "mpl-frob", "--p", "3", "--e", "2", "--modulus", "g^2+1", "--s", "1", "--alpha", "g", "--cutoff", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["result"]["exact"], true);
}
