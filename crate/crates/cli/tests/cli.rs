use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn kbb(args: &[&str]) -> Output {
    kbb_env(args, &[])
}

fn kbb_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kbb"));
    cmd.args(args).env_remove("KBB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("kbb runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "kbb failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = workspace().join("schemas").join(format!("{name}.json"));
    let raw = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&raw).unwrap()).expect("schema compiles")
}

fn assert_valid(name: &str, args: &[&str]) -> Value {
    let text = stdout(&kbb(args));
    let v: Value = serde_json::from_str(&text).expect("JSON output");
    let errors: Vec<String> = schema(name).iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?} violates {name}.json: {errors:?}");
    v
}

#[test]
fn every_json_report_matches_its_schema() {
    assert_valid("boundary", &["boundary", "--p", "5"]);
    assert_valid("boundary", &["boundary", "--p", "7", "--format", "json"]);
    assert_valid("boundary", &["boundary", "--l2"]);
    assert_valid("points", &["points", "--p", "7", "--format", "json"]);
    assert_valid("curves", &["curves", "--p", "5", "--format", "json"]);
    assert_valid("bounds", &["bounds", "--p", "5", "--format", "json"]);
    assert_valid("index_bound", &["index-bound", "--p", "11", "--format", "json"]);
    assert_valid("classnum", &["classnum", "-1200", "--format", "json"]);
    assert_valid("fqm_isotropic", &["fqm", "isotropic", "--p", "5", "--format", "json"]);
    assert_valid("fqm_isotropic", &["fqm", "isotropic", "--d", "1", "--format", "json"]);
    assert_valid("fqm_order", &["fqm", "order", "--p", "5", "--dim", "2", "--brute-force", "--format", "json"]);
    assert_valid("verify", &["verify", "classnum", "--format", "json"]);
    assert_valid("verify", &["verify", "lifts", "--count", "3", "--format", "json"]);
}

#[test]
fn documented_examples() {
    assert_eq!(stdout(&kbb(&["index-bound", "--p", "5"])), "6300\n");
    assert_eq!(stdout(&kbb(&["classnum", "-1200"])), "h(-1200) = 12\n");
    let bounds = assert_valid("bounds", &["bounds", "--p", "5", "--format", "json"]);
    assert_eq!((bounds["type_p"].as_i64(), bounds["type_2p"].as_i64()), (Some(40), Some(40)));
    assert!(stdout(&kbb(&["verify", "isotropic", "--p", "7"])).starts_with("PASS isotropic (14 checks)"));
    let orders = assert_valid("verify", &["verify", "orders", "--p", "5", "--dim", "3", "--format", "json"]);
    assert_eq!(orders["passed"], Value::Bool(true));
    assert_eq!(orders["details"]["orders"][0]["brute_force"].as_u64(), Some(240));
    assert!(stdout(&kbb(&["verify", "transvections", "--seed", "42", "--count", "20"])).starts_with("PASS"));
    let dot = stdout(&kbb(&["boundary", "--p", "5", "--format", "dot"]));
    assert!(dot.starts_with("graph boundary {"));
    assert_eq!(dot.matches("shape=box").count(), 4);
}

#[test]
fn l2_output_matches_golden_files() {
    let golden = workspace().join("crates/core/tests/golden");
    let json = stdout(&kbb(&["boundary", "--l2"]));
    let dot = stdout(&kbb(&["boundary", "--l2", "--format", "dot"]));
    assert_eq!(json, std::fs::read_to_string(golden.join("l2_boundary.json")).unwrap());
    assert_eq!(dot, std::fs::read_to_string(golden.join("l2_boundary.dot")).unwrap());
}

#[test]
fn bad_prime_is_an_argument_error() {
    for p in ["4", "3", "2", "-5", "9"] {
        let o = kbb(&["boundary", "--p", p]);
        assert_eq!(o.status.code(), Some(2), "p = {p}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("p must be a prime > 3"), "p = {p}");
    }
}

#[test]
fn argument_errors_exit_with_two() {
    let cases: [&[&str]; 6] = [
        &["boundary"],
        &["boundary", "--p", "5", "--l2"],
        &["verify", "nonsense"],
        &["classnum", "-5"],
        &["fqm", "order", "--p", "5", "--dim", "3", "--eps", "1"],
        &["points", "--p", "5", "--format", "dot"],
    ];
    for args in cases {
        assert_eq!(kbb(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(kbb_env(&["index-bound", "--p", "5"], &[("KBB_THREADS", "zero")]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let cmds: [&[&str]; 4] = [
        &["boundary", "--p", "7"],
        &["curves", "--p", "5", "--format", "json"],
        &["verify", "hyperplanes", "--seed", "9", "--count", "15", "--format", "json"],
        &["verify", "points", "--seed", "3", "--count", "10", "--format", "json"],
    ];
    for args in cmds {
        let one = stdout(&kbb_env(args, &[("KBB_THREADS", "1")]));
        let four = stdout(&kbb_env(args, &[("KBB_THREADS", "4")]));
        let default = stdout(&kbb(args));
        assert_eq!(one, four, "{args:?}");
        assert_eq!(one, default, "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graph.dot");
    let o = kbb(&["boundary", "--p", "5", "--format", "dot", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&kbb(&["boundary", "--p", "5", "--format", "dot"])));
}
