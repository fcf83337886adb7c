//! Exit codes and report shape of the `ltpg` binary.

use std::process::Command;

use serde_json::Value;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn ltpg(args: &[&str], env: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ltpg"));
    cmd.args(args).env_remove("LTPG_PREC");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn data(name: &str) -> String {
    format!("{DATA}/{name}")
}

fn report(stdout: &str) -> Value {
    let v: Value = serde_json::from_str(stdout).expect("report is JSON");
    assert_eq!(v["schema"], "ltpg/1");
    v
}

#[test]
fn verified_commands_exit_zero() {
    let (code, out) = ltpg(&["fg", "--field", &data("q3.json"), "--phi", "mult", "--prec", "20"], &[]);
    assert_eq!(code, 0);
    assert_eq!(report(&out)["status"], "verified");
    let (code, out) = ltpg(&["herr", &data("trivial.json"), "--no-witnesses"], &[]);
    assert_eq!(code, 0);
    let v = report(&out);
    assert_eq!(v["result"]["degrees"]["1"]["divisors"], serde_json::json!([0, 0]));
    assert_eq!(v["result"]["stability"]["precision"], 80);
}

#[test]
fn refutation_exits_two() {
    let (code, out) = ltpg(&["check", &data("broken.json")], &[]);
    assert_eq!(code, 2);
    assert_eq!(report(&out)["status"], "refuted");
}

#[test]
fn input_errors_exit_one() {
    let (code, out) = ltpg(&["herr", &data("missing.json")], &[]);
    assert_eq!(code, 1);
    assert_eq!(report(&out)["status"], "error");
    assert_eq!(ltpg(&["fg", "--field", &data("q3.json"), "--phi", "bogus"], &[]).0, 1);
    assert_eq!(ltpg(&["herr"], &[]).0, 1);
    assert_eq!(ltpg(&["suite", "nonexistent"], &[]).0, 1);
    assert_eq!(ltpg(&["herr", &data("trivial.json")], &[("LTPG_PREC", "abc")]).0, 1);
}

#[test]
fn precision_comes_from_the_environment() {
    let (code, out) = ltpg(&["herr", &data("trivial.json"), "--no-witnesses"], &[("LTPG_PREC", "24")]);
    assert_eq!(code, 0);
    assert_eq!(report(&out)["result"]["stability"]["precision"], 48);
}

#[test]
fn output_is_deterministic() {
    let args = ["suite", "calibration", "--seed", "3"];
    let (a, b) = (ltpg(&args, &[]), ltpg(&args, &[]));
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}
