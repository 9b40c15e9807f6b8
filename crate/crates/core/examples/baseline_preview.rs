//! Signal-fusion baseline: ranked candidates and the chosen span.
//!
//! cargo run --example baseline_preview

use podpreview::pipeline::{Engine, PipelineConfig};
use podpreview::transcript::Episode;

fn main() {
    let episode = Episode::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/lucid_dreaming.json")).unwrap();
    let engine = Engine::new(PipelineConfig::default(), None).unwrap();
    let (_, preview) = engine.extract_baseline(&episode).unwrap();

    for (rank, c) in preview.candidates.iter().enumerate() {
        println!("#{rank} [{:7.2} - {:7.2}] score {:.3}", c.span.start_s, c.span.end_s, c.rank_score);
    }
    let max = preview.series.values.iter().cloned().fold(0.0, f64::max);
    println!(
        "chosen [{:.2} - {:.2}], degenerate {}, series peak {max:.3} over {} cells",
        preview.span.start_s,
        preview.span.end_s,
        preview.degenerate,
        preview.series.len()
    );
}
