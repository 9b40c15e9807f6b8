//! Print the system and user prompts for an episode.
//!
//! cargo run --example build_prompt

use podpreview::promptkit::PromptKit;
use podpreview::transcript::{Episode, Sentencizer};

fn main() {
    let episode = Episode::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/lucid_dreaming.json")).unwrap();
    let transcript = episode.transcript(&Sentencizer::default()).unwrap();
    let kit = PromptKit::default();
    let bundle = kit.build(&episode, &transcript).unwrap();
    println!("===== system =====\n{}\n", bundle.system_prompt);
    println!("===== user =====\n{}", bundle.user_prompt);
    eprintln!("~{} tokens", bundle.token_estimate);
}
