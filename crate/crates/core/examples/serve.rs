//! Run the HTTP service with a canned client.
//!
//! cargo run --example serve
//! curl -X POST localhost:8080/episodes --data @fixtures/lucid_dreaming.json -H 'content-type: application/json'

use std::sync::Arc;

use podpreview::llm::MockClient;
use podpreview::pipeline::service::{serve_blocking, AppState};
use podpreview::pipeline::{Engine, PipelineConfig, PreviewStore};

fn main() -> std::io::Result<()> {
    env_logger::init();
    let dir = env!("CARGO_MANIFEST_DIR");
    // the script repeats its last entry once exhausted
    let client = MockClient::from_path(format!("{dir}/fixtures/mock_llm_ok.json")).unwrap();
    let config = PipelineConfig::default();
    let addr = config.service.bind.parse().unwrap();
    let store = Arc::new(PreviewStore::open(std::env::temp_dir().join("podpreview-serve.jsonl")).unwrap());
    let engine = Arc::new(Engine::new(config, Some(Arc::new(client))).unwrap());
    eprintln!("listening on http://{addr}");
    serve_blocking(AppState::new(engine, store), addr)
}
