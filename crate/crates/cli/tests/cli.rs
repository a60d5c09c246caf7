use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eggunital")).args(args).env_remove("EGGUNITAL_SEED").output().unwrap()
}

fn certificates(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn strip_timing(v: &mut Value) {
    if let Value::Object(map) = v {
        map.remove("wall_time_ms");
        for (_, child) in map.iter_mut() {
            strip_timing(child);
        }
    } else if let Value::Array(items) = v {
        items.iter_mut().for_each(strip_timing);
    }
}

#[test]
fn small_pipeline_passes() {
    let out = run(&["pipeline", "d9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let certs = certificates(&out);
    assert_eq!(certs.len(), 8);
    assert!(certs.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn exhaustive_unital_check_on_order_nine_plane() {
    let out = run(&["unital", "verify", "--plane", "d9", "--mode", "exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let c = &certificates(&out)[0];
    assert_eq!(c["checks_run"], 91);
    assert_eq!(c["details"]["meet_histogram"]["1"], 28);
    assert_eq!(c["details"]["meet_histogram"]["4"], 63);
}

#[test]
fn same_seed_reproduces_certificates() {
    let args = ["--seed", "17", "unital", "verify", "--lines", "30"];
    let mut a = certificates(&run(&args));
    let mut b = certificates(&run(&args));
    a.iter_mut().chain(b.iter_mut()).for_each(strip_timing);
    assert_eq!(a, b);
    assert_eq!(a[0]["seed"], 17);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_eggunital"))
        .args(["unital", "verify", "--plane", "d9", "--lines", "3"])
        .env("EGGUNITAL_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(certificates(&out)[0]["seed"], 5);
}

#[test]
fn spec_file_and_out_directory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("pw.toml");
    std::fs::write(&spec, "q = 3\nm = 5\nb = [0, 1, 0, 0, 0]\nc = [0, 0, 0, 2, 0]\nname = \"pw\"\n").unwrap();
    let out_dir = dir.path().join("certs");
    let out = run(&["blocking", "solvability", "--spec", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let certs = certificates(&out);
    assert_eq!(certs.len(), 2);
    assert_eq!(certs[0]["checks_run"], 243);
    assert_eq!(certs[1]["object"], "pw_closed_form_roots");
    let written = std::fs::read_to_string(out_dir.join("certificates.jsonl")).unwrap();
    assert_eq!(written.lines().count(), 2);
}

#[test]
fn parse_errors_are_usage_errors_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    std::fs::write(&spec, "q = 3\nm = [\n").unwrap();
    let out = run(&["blocking", "solvability", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml") && err.contains("line"), "{err}");
    assert_eq!(run(&["--shard", "3/2", "plane", "axioms"]).status.code(), Some(2));
    assert_eq!(run(&["egg", "frobnicate"]).status.code(), Some(2));
}

#[test]
fn failed_certificate_exits_one() {
    // the Kantor-Knuth egg of PG(7,3) is not good at E(0,0)
    let out = run(&["egg", "goodness", "--preset", "kk-q3-m2", "--at", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(certificates(&out)[0]["status"], "fail");
}

#[test]
fn shards_split_the_work() {
    let full = certificates(&run(&["egg", "verify", "--preset", "kk-q3-m2", "--mode", "exhaustive"]));
    let mut sum = 0;
    for i in 0..2 {
        let shard = format!("{i}/2");
        let part = certificates(&run(&["--shard", &shard, "egg", "verify", "--preset", "kk-q3-m2", "--mode", "exhaustive"]));
        sum += part[0]["checks_run"].as_u64().unwrap();
    }
    assert_eq!(sum, full[0]["checks_run"].as_u64().unwrap());
}
