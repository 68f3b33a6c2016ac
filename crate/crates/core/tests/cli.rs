use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn catwork(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catwork"))
        .args(args)
        .env_remove("CATWORK_BRUTE_CAP")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn build_writes_two_files_deterministically() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = catwork(&["build", path(&scenario("warmup.json")), "--out", path(dir.path())]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for side in ["warmup.M.json", "warmup.N.json"] {
        let first = std::fs::read(a.path().join(side)).unwrap();
        assert_eq!(first, std::fs::read(b.path().join(side)).unwrap());
        assert_eq!(first, std::fs::read(golden(side)).unwrap(), "{side} drifted from its golden copy");
    }
    let m = read_json(&a.path().join("warmup.M.json"));
    assert_eq!(m["provenance"]["seed"], 11);
    // 5 enters at stage 7: U7 sits at a_0 of sort 5 on the left (10 elements per sort).
    assert_eq!(m["structure"]["unary"]["U7"], serde_json::json!([50]));
    let n = read_json(&a.path().join("warmup.N.json"));
    assert_eq!(n["structure"]["unary"]["U7"], serde_json::json!([57]));
}

#[test]
fn warmup_report_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = catwork(&["verify", path(&scenario("warmup.json")), "--suite", "warmup", "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&report).unwrap(), std::fs::read(golden("warmup.verify.json")).unwrap());
}

#[test]
fn horizon_below_entry_stage_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("warmup.json")).unwrap().replace("\"H\": 8", "\"H\": 5");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let out = catwork(&["build", path(&bad), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("caps.H") && err.contains("H = 5"), "{err}");
    assert!(!dir.path().join("warmup.M.json").exists());
}

#[test]
fn unknown_keys_and_bad_flags_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("warmup.json")).unwrap().replace("\"seed\"", "\"sed\"");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(catwork(&["verify", path(&bad)]).status.code(), Some(2));
    assert_eq!(catwork(&["verify", path(&scenario("warmup.json")), "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(catwork(&["verify", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(catwork(&["--help"]).status.code(), Some(0));
}

#[test]
fn corrupted_artifact_fails_with_named_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("warmup.json");
    assert_eq!(catwork(&["build", path(&sc), "--out", path(dir.path())]).status.code(), Some(0));
    let untouched = catwork(&["verify", path(&sc), "--suite", "warmup", "--artifacts", path(dir.path())]);
    assert_eq!(untouched.status.code(), Some(0));

    // Move the stage marker from a_0 to a_1 in sort 5 on the left.
    let file = dir.path().join("warmup.M.json");
    let mut v = read_json(&file);
    v["structure"]["unary"]["U7"] = serde_json::json!([51]);
    std::fs::write(&file, serde_json::to_string_pretty(&v).unwrap()).unwrap();

    let report = dir.path().join("r.json");
    let out = catwork(&["verify", path(&sc), "--suite", "warmup", "--artifacts", path(dir.path()), "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(1));
    let r = read_json(&report);
    let layout = &r["suites"][0]["claims"][0];
    assert_eq!(layout["id"], "warmup.layout");
    assert_eq!(layout["status"], "fail");
    assert_eq!(layout["counterexample"]["violated"], "stage relation");
    assert_eq!(layout["counterexample"]["relation"], "U7");
    assert_eq!(layout["counterexample"]["side"], "M");
    assert_eq!(r["pass"], false);
}

#[test]
fn unreadable_artifact_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("warmup.json");
    assert_eq!(catwork(&["build", path(&sc), "--out", path(dir.path())]).status.code(), Some(0));
    std::fs::write(dir.path().join("warmup.N.json"), "{ not json").unwrap();
    let out = catwork(&["verify", path(&sc), "--suite", "warmup", "--artifacts", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn logic_suite_runs_alone() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = catwork(&["verify", path(&scenario("default.json")), "--suite", "logic", "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = read_json(&report);
    let suites = r["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "logic");
    let ids: Vec<&str> = suites[0]["claims"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["logic.separation", "logic.truncation_stability", "logic.bounded_substructure", "logic.ef_consistency"]);
    assert_eq!(r["schema"], "catwork.report");
    assert_eq!(r["version"], 1);
}

#[test]
fn default_scenario_passes_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = catwork(&["verify", path(&scenario("default.json")), "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = read_json(&report);
    assert_eq!(r["summary"]["failed"], 0);
    assert!(r["suites"].as_array().unwrap().iter().flat_map(|s| s["claims"].as_array().unwrap()).all(|c| c["anchor"].as_str().is_some_and(|a| !a.is_empty())));
}

#[test]
fn small_boxes_enumerate_every_isomorphism() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = catwork(&["verify", path(&scenario("small_boxes.json")), "--suite", "boxes", "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_json(&report);
    let brute = r["suites"][0]["claims"].as_array().unwrap().iter().find(|c| c["id"] == "boxes.full_enumeration").unwrap().clone();
    assert_eq!(brute["status"], "pass");
}

#[test]
fn roundtrip_hundred_trials_recover() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = catwork(&["roundtrip", path(&scenario("default.json")), "--trials", "100", "--out", path(p)]);
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stdout).contains("100/100 recovered"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r = read_json(&a);
    assert!(r["runs"].as_array().unwrap().iter().all(|run| run["s_omega_oracle_calls"].as_u64() >= run["s_omega_components"].as_u64()));
}

#[test]
fn roundtrip_of_the_empty_set() {
    let out = catwork(&["roundtrip", path(&scenario("empty.json")), "--trials", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1/1 recovered"));
}

#[test]
fn seed_override_changes_the_draw() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let sc = scenario("default.json");
    assert_eq!(catwork(&["roundtrip", path(&sc), "--trials", "5", "--out", path(&a)]).status.code(), Some(0));
    assert_eq!(catwork(&["--seed-override", "99", "roundtrip", path(&sc), "--trials", "5", "--out", path(&b)]).status.code(), Some(0));
    let (ra, rb) = (read_json(&a), read_json(&b));
    assert_eq!(rb["seed"], 99);
    assert_eq!(ra["runs"][0]["spec"], rb["runs"][0]["spec"]);
    assert_ne!(ra["runs"], rb["runs"]);
}

#[test]
fn brute_cap_env_overrides_the_scenario() {
    let out = Command::new(env!("CARGO_BIN_EXE_catwork"))
        .args(["verify", path(&scenario("small_boxes.json")), "--suite", "boxes"])
        .env("CATWORK_BRUTE_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("SKIP boxes.full_enumeration"), "{text}");
    assert!(text.contains("brute-force cap 10"), "{text}");
}
