use std::process::{Command, Output};

use ellid::harness::SuiteReport;

fn ellid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellid")).args(args).env_remove("ELLID_SEED").output().expect("spawn ellid")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn list_prints_every_identity() {
    let o = ellid(&["list", "--edges"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    for id in ellid::harness::all_ids() {
        assert!(out.lines().any(|l| l.starts_with(&format!("{id} "))), "{id} missing");
    }
    assert!(out.contains(" -> "));
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = ellid(&["verify", "--id", "basic-g", "--n", "4", "--trials", "3", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = SuiteReport::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(report.all_pass());
    assert_eq!(report.results.len(), 3);
    assert_eq!(SuiteReport::from_json(&report.to_json()).unwrap().to_json(), report.to_json());
}

#[test]
fn impossible_tolerance_exits_one() {
    let o = ellid(&["verify", "--id", "basic-g", "--n", "6", "--tol", "1e-300", "--trials", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&ellid(&["verify", "--id", "no-such-id", "--n", "2"])), 2);
    assert_eq!(code(&ellid(&["verify", "--id", "basic-g", "--n", "2", "--param", "q"])), 2);
    assert_eq!(code(&ellid(&["verify", "--id", "basic-g", "--n", "2", "--param", "q=x"])), 2);
    assert_eq!(code(&ellid(&["sweep", "--suite", "bogus"])), 2);
}

#[test]
fn fixed_parameters_are_used() {
    let o = ellid(&["verify", "--id", "geo", "--n", "3", "--mode", "numeric", "--param", "q=0.5", "--trials", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_env_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["sweep", "--only", "geo", "--only", "basic-g", "--n-max", "3", "--trials", "2"];
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "7", "--json", a.to_str().unwrap()]);
    assert_eq!(code(&ellid(&with_flag)), 0);
    let mut with_env = args.to_vec();
    with_env.extend(["--json", b.to_str().unwrap()]);
    let o = Command::new(env!("CARGO_BIN_EXE_ellid")).args(&with_env).env("ELLID_SEED", "7").output().unwrap();
    assert_eq!(code(&o), 0);
    let read = |p: &std::path::Path| SuiteReport::from_json(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(read(&a).to_json_without_timings(), read(&b).to_json_without_timings());
}
