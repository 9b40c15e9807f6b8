//! Sentencize a word-timed episode and print the timestamped transcript.
//!
//! cargo run --example render_transcript [episode.json]

use podpreview::transcript::{parse_timestamped, render_timestamped, Episode, Sentencizer};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/spanish_episode.json").into());
    let episode = Episode::from_path(&path).expect("readable episode");
    let transcript = episode.transcript(&Sentencizer::default()).expect("valid timings");
    let text = render_timestamped(&transcript);
    println!("{text}");

    let back = parse_timestamped(&text).expect("rendered text parses");
    eprintln!(
        "{} sentences, {:.2}s, round-trip ok: {}",
        transcript.len(),
        transcript.end_s(),
        back.len() == transcript.len()
    );
}
