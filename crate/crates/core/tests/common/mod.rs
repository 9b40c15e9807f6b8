#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use podpreview::llm::{ClientError, CompletionClient, CompletionRequest, RetryPolicy};
use podpreview::pipeline::{Engine, PipelineConfig};
use podpreview::transcript::{Episode, Sentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

const WORDS: &[&str] = &[
    "the", "and", "we", "you", "it", "is", "that", "of", "to", "in", "sleep", "dream", "study", "really", "amazing",
    "music", "people", "night", "brain", "memory", "about", "what", "this", "was",
];

/// English episode with `n` sentences of 2–15 s and small gaps.
pub fn synthetic_episode(id: &str, n: usize, seed: u64) -> Episode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0f64;
    let sentences = (0..n)
        .map(|i| {
            let len = rng.random_range(2.0..15.0f64);
            let words: Vec<&str> =
                (0..rng.random_range(4..12)).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
            let s = Sentence { index: i, text: format!("{}.", words.join(" ")), start_s: t, end_s: t + len };
            t += len + rng.random_range(0.0..0.5);
            s
        })
        .collect();
    Episode {
        episode_id: id.to_string(),
        title: format!("Episode {id}"),
        description: "A synthetic episode.".into(),
        show_name: "Synthetic".into(),
        language_tags: vec!["en".into()],
        words: None,
        sentences: Some(sentences),
    }
}

pub fn output_json(start: f64) -> String {
    format!(
        "```json\n{{\"preview_start_s\": {start}, \"preview_end_s\": {}, \"episode_theme\": \"Sleep\", \
         \"preview_title\": \"A title\", \"preview_explanation\": \"Why.\", \"hashtags\": [\"#sleep\"]}}\n```",
        start + 60.0
    )
}

/// Answers every call after `latency`, failing transiently when the user
/// prompt mentions `fail_marker`. Tracks peak concurrency.
pub struct Instrumented {
    pub latency: Duration,
    pub fail_marker: Option<String>,
    pub start_s: f64,
    in_flight: AtomicUsize,
    pub peak: AtomicUsize,
    pub calls: AtomicUsize,
}

impl Instrumented {
    pub fn new(latency: Duration) -> Self {
        Self {
            latency,
            fail_marker: None,
            start_s: 30.0,
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn failing_on(mut self, marker: &str) -> Self {
        self.fail_marker = Some(marker.to_string());
        self
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

impl CompletionClient for Instrumented {
    fn call(&self, req: &CompletionRequest) -> Result<String, ClientError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(self.latency);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        if self.fail_marker.as_ref().is_some_and(|m| req.user.contains(m.as_str())) {
            return Err(ClientError::Transient("injected failure".into()));
        }
        Ok(output_json(self.start_s))
    }
}

pub fn engine_with(client: Arc<dyn CompletionClient>, max_in_flight: usize) -> Engine {
    let mut config = PipelineConfig::default();
    config.client.retry = RetryPolicy::immediate(2);
    config.client.max_in_flight = max_in_flight;
    Engine::new(config, Some(client)).unwrap()
}
