mod common;

use std::process::{Command, Output};

use common::fixture;
use podpreview::selector::check_span;
use podpreview::transcript::{Episode, Sentencizer};
use serde_json::Value;

fn podpreview(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_podpreview")).args(args).output().unwrap()
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn extract_with_mock_prints_aligned_record() {
    let out = podpreview(&["extract", "--mock-llm", &path("mock_llm_ok.json"), &path("lucid_dreaming.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["system"], "llm");
    assert_eq!(rec["start_s"], 120.5);
    assert_eq!(rec["metadata"]["preview_title"], "Does Reality Testing Work?");
    assert_eq!(rec["metadata"]["hashtags"][2], "#DreamScience");

    let ep = Episode::from_path(fixture("lucid_dreaming.json")).unwrap();
    let t = ep.transcript(&Sentencizer::default()).unwrap();
    let span = podpreview::selector::PreviewRecord::span(&serde_json::from_value(rec).unwrap());
    check_span(&t, &span, 60.0).unwrap();
}

#[test]
fn exit_codes() {
    let out = podpreview(&["extract", "--mock-llm", &path("mock_llm_ok.json"), "/no/such/episode.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no such file"));

    let out = podpreview(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let out = podpreview(&["extract", "--mock-llm", &path("mock_llm_fail.json"), &path("lucid_dreaming.json")]);
    assert_eq!(out.status.code(), Some(1));

    let out = podpreview(&["extract", "--mock-llm", &path("mock_llm_ok.json"), &path("spanish_episode.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not eligible"));

    assert_eq!(podpreview(&["--help"]).status.code(), Some(0));
}

#[test]
fn baseline_needs_no_client() {
    let out = podpreview(&["baseline", &path("lucid_dreaming.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["system"], "baseline");
    assert!(rec["metadata"].is_null());
}

#[test]
fn eval_stats_on_reconstructed_campaign() {
    let out = podpreview(&["eval", "stats", &path("judgments_238.jsonl"), "--key", &path("judgments_238.key.jsonl")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("54.2%"), "{report}");
    assert!(report.contains("81.09%"));
    assert!(report.contains("1.37e-10"));

    let out = podpreview(&[
        "eval",
        "stats",
        &path("judgments_238.jsonl"),
        "--key",
        &path("judgments_238.key.jsonl"),
        "--json",
        "--convention",
        "ties_as_losses",
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["binomial_n"], 238);
    assert_eq!(v["per_question"].as_array().unwrap().len(), 3);

    let out = podpreview(&["eval", "stats", &path("judgments_238.jsonl")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_build_then_batch() {
    let dir = tempfile::tempdir().unwrap();
    let items = dir.path().join("items.jsonl");
    let key = dir.path().join("key.jsonl");
    let out = podpreview(&[
        "eval",
        "build",
        &path("pairs.jsonl"),
        "--seed",
        "11",
        "--out",
        items.to_str().unwrap(),
        "--key",
        key.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let exported = std::fs::read_to_string(&items).unwrap();
    assert_eq!(exported.lines().count(), 6);
    assert!(!exported.contains("hidden_assignment"));
    assert!(!exported.contains("\"system\""));
    assert_eq!(std::fs::read_to_string(&key).unwrap().lines().count(), 6);

    let input = dir.path().join("episodes");
    std::fs::create_dir(&input).unwrap();
    std::fs::copy(fixture("lucid_dreaming.json"), input.join("a.json")).unwrap();
    std::fs::copy(fixture("spanish_episode.json"), input.join("b.json")).unwrap();
    std::fs::write(input.join("c.json"), "{broken").unwrap();
    let store = dir.path().join("store.jsonl");
    let out = podpreview(&[
        "batch",
        input.to_str().unwrap(),
        "--mock-llm",
        &path("mock_llm_ok.json"),
        "--store",
        store.to_str().unwrap(),
        "--config",
        &path("pipeline.toml"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let jobs: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(jobs.len(), 3);
    assert_eq!(jobs.iter().filter(|j| j["state"] == "done").count(), 1);
    assert_eq!(std::fs::read_to_string(&store).unwrap().lines().count(), 1);
}
