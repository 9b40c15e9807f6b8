//! Batch extraction over synthetic episodes with a bounded worker pool.
//!
//! cargo run --example batch_worker

use std::sync::Arc;
use std::time::Instant;

use podpreview::llm::{mock_client, ScriptedResponse};
use podpreview::pipeline::{run_episodes, Engine, JobMode, JobState, PipelineConfig, PreviewStore};
use podpreview::transcript::{Episode, Sentence};

fn episode(i: usize) -> Episode {
    let sentences = (0..40)
        .map(|j| Sentence {
            index: j,
            text: format!("In part {j} we talk about the amazing research on sleep and memory."),
            start_s: j as f64 * 6.0,
            end_s: j as f64 * 6.0 + 5.5,
        })
        .collect();
    Episode {
        episode_id: format!("demo-{i:03}"),
        title: format!("Demo episode {i}"),
        description: "Synthetic.".into(),
        show_name: "Demo".into(),
        language_tags: vec!["en-GB".into()],
        words: None,
        sentences: Some(sentences),
    }
}

fn main() {
    let reply = r##"{"preview_start_s": 30.2, "preview_end_s": 90, "episode_theme": "Sleep", "preview_title": "Memory at night",
        "preview_explanation": "Clear hook.", "hashtags": ["#sleep"]}"##;
    let script = (0..120).map(|_| ScriptedResponse::ok(reply).with_latency(0.02)).collect();
    let engine = Engine::new(PipelineConfig::default(), Some(Arc::new(mock_client(script)))).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let store = PreviewStore::open(dir.path().join("previews.jsonl")).unwrap();
    let started = Instant::now();
    let jobs = run_episodes(&engine, &store, (0..60).map(episode).collect(), JobMode::Both, 8).unwrap();
    let done = jobs.iter().filter(|j| j.state == JobState::Done).count();
    println!(
        "{done}/{} jobs done in {:.2}s, {} active records",
        jobs.len(),
        started.elapsed().as_secs_f64(),
        store.active_count()
    );
}
