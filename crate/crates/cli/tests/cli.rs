use std::path::PathBuf;

use assert_cmd::Command;
use serde_json::Value;

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn bin() -> Command {
    let mut c = Command::cargo_bin("timed-tester").unwrap();
    c.env_remove("TIMED_TESTER_SEED");
    c
}

fn json_of(out: &[u8]) -> Value {
    serde_json::from_slice(out).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn loop_word(n: usize) -> String {
    let mut s = String::from("{\"format\":\"timed-tester/1\"}\n");
    for i in 0..n {
        s.push_str(&format!("{{\"symbol\":\"a\",\"delay\":\"{}/8\"}}\n", 1 + i % 7));
    }
    s
}

#[test]
fn validate_reports_problems_with_exit_code() {
    let out = bin().args(["validate", &corpus("thick_loop.json")]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(json_of(&out.stdout)["valid"], true);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"format":"timed-tester/1","alphabet":["a"],"clocks":["x"],"locations":["q"],"initial":["q"],"final":["nowhere"],
            "transitions":[{"source":"q","symbol":"z","guard":[],"resets":[],"target":"q"}]}"#,
    );
    let out = bin().args(["validate", &bad]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out.stdout);
    assert_eq!(v["valid"], false);
    assert!(v["violations"].as_array().unwrap().len() >= 2);
}

#[test]
fn distance_matches_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir, "a.jsonl", "{\"symbol\":\"a\",\"delay\":1}\n{\"symbol\":\"a\",\"delay\":100}\n");
    let b = write(&dir, "b.jsonl", "{\"symbol\":\"a\",\"delay\":\"100\"}\n{\"symbol\":\"a\",\"delay\":\"1\"}\n");
    let out = bin().args(["distance", &a, &b]).output().unwrap();
    assert!(out.status.success());
    let v = json_of(&out.stdout);
    assert_eq!(v["absolute"], "2");
    assert_eq!(v["relative"], "2/101");
    assert_eq!(v["script"].as_array().unwrap().len(), 2);
}

#[test]
fn regions_and_components_documents() {
    let out = bin().args(["regions", &corpus("thick_loop.json")]).output().unwrap();
    assert!(out.status.success());
    assert!(json_of(&out.stdout)["m"].as_u64().unwrap() >= 1);
    let out = bin().args(["regions", "--dot", &corpus("thick_loop.json")]).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("digraph"));
    let out = bin().args(["components", &corpus("thin_punctual.json")]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"thin\""), "{}", text);
}

#[test]
fn membership_gives_witness() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.jsonl", &loop_word(5));
    let out = bin().args(["membership", "--automaton", &corpus("thick_loop.json"), "--word", &w]).output().unwrap();
    let v = json_of(&out.stdout);
    assert_eq!(v["accepted"], true);
    assert_eq!(v["witness"]["steps"].as_array().unwrap().len(), 5);
}

#[test]
fn test_is_reproducible_and_env_seed_wins() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.jsonl", &loop_word(300));
    let args = ["test", "--automaton", &corpus("thick_loop.json"), "--word", &w, "--epsilon", "0.4", "--k-override", "8"];
    let run = |seed: &str, env: Option<&str>| {
        let mut c = bin();
        c.args(args).args(["--seed", seed]);
        if let Some(e) = env {
            c.env("TIMED_TESTER_SEED", e);
        }
        c.output().unwrap().stdout
    };
    let a = run("1", None);
    assert_eq!(a, run("1", None));
    assert_ne!(a, run("2", None));
    assert_eq!(a, run("2", Some("1")));
    let v = json_of(&a);
    assert_eq!(v["verdict"], "accept");
    assert_eq!(v["pi_tried"], 1);
    assert_eq!(v["fallback_used"], false);
    assert!(v.get("witness").is_none());
}

#[test]
fn test_emits_witness_and_reads_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.jsonl", &loop_word(100));
    let out = bin()
        .args(["test", "--automaton", &corpus("thick_loop.json"), "--word", &w, "--epsilon", "0.4", "--k-override", "4", "--emit-witness"])
        .output()
        .unwrap();
    assert!(json_of(&out.stdout)["witness"].is_array());
    let out = bin()
        .args(["test", "--automaton", &corpus("thick_loop.json"), "--stdin-stream", "--epsilon", "0.4"])
        .write_stdin(loop_word(20))
        .output()
        .unwrap();
    let v = json_of(&out.stdout);
    assert_eq!(v["verdict"], "accept");
    assert_eq!(v["fallback_used"], true);
}

#[test]
fn bad_multiplier_is_rejected() {
    let out = bin()
        .args(["test", "--automaton", &corpus("thick_loop.json"), "--stdin-stream", "--epsilon", "0.4", "--sample-weight-multiplier", "3"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn sample_emits_factors() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.jsonl", &loop_word(200));
    let out = bin().args(["sample", "--word", &w, "--l", "3", "--k", "2", "--seed", "4"]).output().unwrap();
    let lines: Vec<Value> = String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|f| f["start"].as_u64().unwrap() <= f["end"].as_u64().unwrap()));
    let out = bin().args(["sample", "--stdin-stream", "--l", "2", "--k", "2", "--seed", "4"]).write_stdin(loop_word(200)).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn stream_reports_memory_counters() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(&dir, "w.jsonl", &loop_word(500));
    let out = bin()
        .args(["stream", "--automaton", &corpus("thick_loop.json"), "--input", &w, "--epsilon", "0.4", "--k-override", "5"])
        .output()
        .unwrap();
    let v = json_of(&out.stdout);
    assert_eq!(v["verdict"], "accept");
    assert_eq!(v["stream"]["letters"], 500);
}

#[test]
fn experiment_writes_documented_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let config = write(
        &dir,
        "config.json",
        &format!(
            r#"{{"format":"timed-tester/1","automaton":{:?},"epsilon":"2/5","trials":5,"seed":3,"target_weight":"80","mode":"spread","output":{:?}}}"#,
            corpus("thick_loop.json"),
            csv_path.to_string_lossy()
        ),
    );
    let out = bin().args(["experiment", "--config", &config]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "trial,seed,verdict_accepted,verdict_far,k_used,samples_drawn,pi_count,wall_time_us,far_claim,far_relative_lower_bound,delta_floor"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("summary,3,1.000000,"));
    let again = bin().args(["experiment", "--config", &config, "--output", "-"]).output().unwrap();
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    let zero = bin().args(["experiment", "--config", &config, "--trials", "0"]).output().unwrap();
    assert!(!zero.status.success());
}
