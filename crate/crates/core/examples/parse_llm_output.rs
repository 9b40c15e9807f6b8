//! Parse a few styles of model reply, including broken ones.
//!
//! cargo run --example parse_llm_output

use podpreview::llm::parse_llm_output;

fn main() {
    let body = r##"{"preview_start_s": 120.5, "preview_end_s": 181.0, "episode_theme": "Dreams",
  "preview_title": "Does Reality Testing Work?", "preview_explanation": "A hands-on technique.",
  "hashtags": ["LucidDreaming", "#dream science"]}"##;
    let replies = [
        format!("Let me think.\n```json\n{body}\n```"),
        format!("My pick: {body} Hope this helps."),
        body.replace("120.5", "\"soon\""),
        body.replace("181.0", "100.0"),
        "I could not decide.".to_string(),
    ];
    for reply in &replies {
        match parse_llm_output(reply) {
            Ok(choice) => println!(
                "ok    {:.1}s..{:.1}s {:?} {:?}",
                choice.preview_start_s, choice.preview_end_s, choice.metadata.preview_title, choice.metadata.hashtags
            ),
            Err(e) => println!("error {e}"),
        }
    }
}
