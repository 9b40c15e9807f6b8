mod common;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{engine_with, synthetic_episode, Instrumented};
use podpreview::pipeline::{run_episodes, run_worker, JobError, JobMode, JobState, PreviewStore, WorkItem};
use podpreview::selector::PreviewSystem;

fn episodes(n: usize) -> Vec<podpreview::transcript::Episode> {
    (0..n).map(|i| synthetic_episode(&format!("ep{i:04}"), 40, i as u64)).collect()
}

#[test]
fn hundred_episodes_all_done() {
    let dir = tempfile::tempdir().unwrap();
    let store = PreviewStore::open(dir.path().join("s.jsonl")).unwrap();
    let client = Arc::new(Instrumented::new(Duration::ZERO));
    let engine = engine_with(client, 8);
    let jobs = run_episodes(&engine, &store, episodes(100), JobMode::Llm, 8).unwrap();
    assert_eq!(jobs.len(), 100);
    assert!(jobs.iter().all(|j| j.state == JobState::Done && j.timings.is_some()));
    assert_eq!(store.active_count(), 100);
}

#[test]
fn one_failing_episode_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let store = PreviewStore::open(dir.path().join("s.jsonl")).unwrap();
    let mut eps = episodes(100);
    eps[37].title = "BROKEN-EPISODE".into();
    let client = Arc::new(Instrumented::new(Duration::ZERO).failing_on("BROKEN-EPISODE"));
    let engine = engine_with(client, 8);
    let jobs = run_episodes(&engine, &store, eps, JobMode::Llm, 8).unwrap();
    let failed: Vec<_> = jobs.iter().filter(|j| j.state == JobState::Failed).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].episode_id, "ep0037");
    assert!(matches!(failed[0].error, Some(JobError::Llm(_))));
    assert!(failed[0].timings.is_none());
    assert_eq!(store.active_count(), 99);
}

#[test]
fn duplicate_episode_supersedes() {
    let dir = tempfile::tempdir().unwrap();
    let store = PreviewStore::open(dir.path().join("s.jsonl")).unwrap();
    let engine = engine_with(Arc::new(Instrumented::new(Duration::ZERO)), 8);
    let ep = synthetic_episode("dup", 30, 1);
    let jobs = run_episodes(&engine, &store, vec![ep.clone(), ep], JobMode::Llm, 2).unwrap();
    assert!(jobs.iter().all(|j| j.state == JobState::Done));
    assert_eq!((store.active_count(), store.superseded_count()), (1, 1));
}

#[test]
fn both_mode_writes_two_records_per_episode() {
    let dir = tempfile::tempdir().unwrap();
    let store = PreviewStore::open(dir.path().join("s.jsonl")).unwrap();
    let engine = engine_with(Arc::new(Instrumented::new(Duration::ZERO)), 8);
    run_episodes(&engine, &store, episodes(10), JobMode::Both, 4).unwrap();
    assert_eq!(store.active_count(), 20);
    assert!(store.active("ep0003", PreviewSystem::Baseline).is_some());
    assert!(store.active("ep0003", PreviewSystem::Llm).is_some());
}

#[test]
fn panics_and_bad_inputs_become_failed_jobs() {
    struct Panicky;
    impl podpreview::llm::CompletionClient for Panicky {
        fn call(&self, _: &podpreview::llm::CompletionRequest) -> Result<String, podpreview::llm::ClientError> {
            panic!("client blew up")
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let store = PreviewStore::open(dir.path().join("s.jsonl")).unwrap();
    let engine = engine_with(Arc::new(Panicky), 2);
    let items = vec![
        WorkItem::new("a", synthetic_episode("a", 20, 1), JobMode::Llm),
        WorkItem::broken("b", "bad.json", JobMode::Llm, JobError::Input("not json".into())),
        WorkItem::new("c", synthetic_episode("c", 20, 2), JobMode::Baseline),
    ];
    let mut jobs = Vec::new();
    let summary = run_worker(&engine, &store, items, 2, |j| jobs.push(j)).unwrap();
    assert_eq!((summary.done, summary.failed), (1, 2));
    let a = jobs.iter().find(|j| j.job_id == "a").unwrap();
    assert!(matches!(&a.error, Some(JobError::Panic(m)) if m.contains("blew up")));
    assert!(run_worker(&engine, &store, Vec::new(), 0, |_| {}).is_err());
}

#[test]
fn in_flight_never_exceeds_cap() {
    let client = Arc::new(Instrumented::new(Duration::from_millis(20)));
    let engine = engine_with(client.clone(), 3);
    let dir = tempfile::tempdir().unwrap();
    let store = PreviewStore::open(dir.path().join("s.jsonl")).unwrap();
    run_episodes(&engine, &store, episodes(40), JobMode::Llm, 8).unwrap();
    assert!(client.peak() <= 3, "peak {}", client.peak());
    assert!(client.peak() >= 2);
}

#[test]
fn restart_reaches_same_active_set() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    let engine = engine_with(Arc::new(Instrumented::new(Duration::ZERO)), 8);
    let eps = episodes(30);
    let first: HashSet<(String, PreviewSystem)> = {
        let store = PreviewStore::open(&path).unwrap();
        run_episodes(&engine, &store, eps[..20].to_vec(), JobMode::Llm, 4).unwrap();
        store.active_records().into_iter().map(|r| (r.record.episode_id, r.record.system)).collect()
    };
    // reprocess everything after a restart: at-least-once delivery
    let store = PreviewStore::open(&path).unwrap();
    run_episodes(&engine, &store, eps.clone(), JobMode::Llm, 4).unwrap();
    let after: HashSet<_> =
        store.active_records().into_iter().map(|r| (r.record.episode_id, r.record.system)).collect();
    assert!(first.is_subset(&after));
    assert_eq!(after.len(), 30);
    drop(store);
    let reopened = PreviewStore::open(&path).unwrap();
    let again: HashSet<_> =
        reopened.active_records().into_iter().map(|r| (r.record.episode_id, r.record.system)).collect();
    assert_eq!(after, again);
    assert_eq!(reopened.superseded_count(), 20);
}

#[test]
fn parallel_executors_speed_up_slow_upstream() {
    let run = |concurrency: usize| {
        let dir = tempfile::tempdir().unwrap();
        let store = PreviewStore::open(dir.path().join("s.jsonl")).unwrap();
        let engine = engine_with(Arc::new(Instrumented::new(Duration::from_millis(100))), 8);
        let started = Instant::now();
        run_episodes(&engine, &store, episodes(64), JobMode::Llm, concurrency).unwrap();
        started.elapsed().as_secs_f64() / 64.0
    };
    let serial = run(1);
    let parallel = run(8);
    assert!(parallel < serial / 4.0, "serial {serial:.3}s/ep, parallel {parallel:.3}s/ep");
}
