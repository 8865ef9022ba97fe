use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const RUNNING: &str = "s0 inf\na 2\nb 3\nfactor 1 1 0\nfactor 2 1 1\npartA 1\n";
const SOLUBLE: &str = "s0 inf 2 3\na -3\nb 6\nfactor 1 3 0\nfactor 2 1 4\npartA 1\n";
const PROPORTIONAL: &str = "s0 inf\na 1\nb 1\nfactor 1 1 0\nfactor 2 2 0\npartA 1\n";
const FAILS_D: &str = "s0 inf\na 1\nb 1\nfactor 1 1 0\nfactor 2 1 1\npartA 1\n";

fn file(name: &str, body: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conic-descent"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn validate_accepts_running_example() {
    let spec = file("running.spec", RUNNING);
    let o = run(&["--json", "validate", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "valid");
    assert_eq!(v["report"]["d"], "6");
    assert_eq!(v["report"]["s_bad"], serde_json::json!(["2", "3"]));
    assert_eq!(
        v["delta_normalization"],
        "cross-resultant c_i*d_j - c_j*d_i"
    );
    assert_eq!(v["suitability_reading"], "-d*p_J(t_v)");
    assert_eq!(v["spec_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn validate_rejects_proportional_factors() {
    let spec = file("proportional.spec", PROPORTIONAL);
    let o = run(&["--json", "validate", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["status"], "invalid");
    let msgs = v["report"]["violations"].as_array().unwrap();
    assert!(msgs
        .iter()
        .any(|m| m.as_str().unwrap().contains("proportional")));
}

#[test]
fn condition_d_on_running_example() {
    let spec = file("running-d.spec", RUNNING);
    let o = run(&["--json", "condition-d", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "holds");
    assert_eq!(v["report"]["holds"], true);
}

#[test]
fn condition_d_failure_exits_two() {
    let spec = file("fails-d.spec", FAILS_D);
    let o = run(&["condition-d", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("status fails"));
}

#[test]
fn descend_finds_verified_point() {
    let spec = file("soluble.spec", SOLUBLE);
    let o = run(&["--json", "descend", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "point_found");
    let out = &v["report"]["outcome"];
    assert_eq!(out["kind"], "point_found");
    assert_eq!(out["verified"], true);
}

#[test]
fn descend_json_is_deterministic() {
    let spec = file("soluble-det.spec", SOLUBLE);
    let a = run(&["--json", "descend", spec.to_str().unwrap()]);
    let b = run(&["descend", spec.to_str().unwrap(), "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn descend_height_zero_stops_at_minimized_dual_selmer() {
    let spec = file("soluble-h0.spec", SOLUBLE);
    let o = run(&[
        "--json",
        "descend",
        spec.to_str().unwrap(),
        "--bounds",
        "height=0",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["status"], "dual_selmer_minimized");
}

#[test]
fn descend_accepts_partial_point_file() {
    let spec = file("soluble-pf.spec", SOLUBLE);
    let points = file("inf.points", "inf 0 0 1 0\n");
    let o = run(&[
        "--json",
        "descend",
        spec.to_str().unwrap(),
        "--point-file",
        points.to_str().unwrap(),
    ]);
    assert!(matches!(code(&o), 0 | 3), "exit {}", code(&o));
}

#[test]
fn solve_reports_point_or_exhaustion() {
    let spec = file("soluble-solve.spec", SOLUBLE);
    let o = run(&[
        "--json",
        "solve",
        spec.to_str().unwrap(),
        "--t",
        "53",
        "--height",
        "50",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["report"]["verified"], true);
    let o = run(&[
        "solve",
        spec.to_str().unwrap(),
        "--t",
        "3",
        "--height",
        "20",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn selmer_brauer_and_local_run() {
    let spec = file("running-misc.spec", RUNNING);
    let s = spec.to_str().unwrap();
    let o = run(&["--json", "selmer", s, "--t", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["report"]["selmer"]["dim"], 1);
    let o = run(&["--json", "brauer", s]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        json(&o)["report"]["generators"].as_array().unwrap().len(),
        2
    );
    let o = run(&["--json", "local", s, "--t", "-1/2", "--place", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["report"]["place"], "3");
}

#[test]
fn input_errors_exit_one() {
    let spec = file("running-err.spec", RUNNING);
    let s = spec.to_str().unwrap();
    assert_eq!(code(&run(&["validate", s, "--unknown"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["validate", "/nonexistent/spec"])), 1);
    assert_eq!(code(&run(&["selmer", s, "--t", "1/0"])), 1);
    assert_eq!(code(&run(&["local", s, "--t", "1", "--place", "4"])), 1);
    assert_eq!(code(&run(&["descend", s, "--bounds", "depth=3"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}
