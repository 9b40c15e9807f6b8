//! Full LLM extraction against a scripted client.
//!
//! cargo run --example llm_preview_mock

use std::sync::Arc;

use podpreview::llm::MockClient;
use podpreview::pipeline::{Engine, PipelineConfig};
use podpreview::transcript::Episode;

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let client = MockClient::from_path(format!("{dir}/fixtures/mock_llm_ok.json")).unwrap();
    let engine = Engine::new(PipelineConfig::default(), Some(Arc::new(client))).unwrap();
    let episode = Episode::from_path(format!("{dir}/fixtures/lucid_dreaming.json")).unwrap();

    let extraction = engine.extract_llm(&episode).unwrap();
    let record = &extraction.records[0];
    println!("{}", serde_json::to_string_pretty(record).unwrap());
    eprintln!("llm call {:.3}s, parse {:.3}s", extraction.timings.llm_call_s, extraction.timings.parse_s);

    let spanish = Episode::from_path(format!("{dir}/fixtures/spanish_episode.json")).unwrap();
    eprintln!("spanish episode: {}", engine.extract_llm(&spanish).unwrap_err());
}
