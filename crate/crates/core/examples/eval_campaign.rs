//! Blind a campaign, simulate judgments, and print the report.
//!
//! cargo run --example eval_campaign

use podpreview::evallab::{
    build_campaign, read_jsonl, render_report, summarize_campaign, Answers, CampaignKey, CampaignPair, Judgment,
    Preference, ReportOptions, Slot, TieConvention,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let pairs: Vec<CampaignPair> = read_jsonl(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/pairs.jsonl")).unwrap();
    let mut all = Vec::new();
    for _ in 0..40 {
        all.extend(pairs.iter().cloned());
    }
    let items = build_campaign(&all, 7).unwrap();
    let key = CampaignKey::from_items(&items);
    println!("{}", items[0].to_blind_json());

    // annotators who favour the llm preview 60/25/15
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let judgments: Vec<Judgment> = items
        .iter()
        .map(|item| {
            let llm = item.hidden_assignment;
            let r: f64 = rng.random();
            let preferred = if r < 0.6 {
                slot_pref(llm)
            } else if r < 0.85 {
                slot_pref(llm.other())
            } else {
                Preference::Tie
            };
            let answers = |p: f64, rng: &mut ChaCha8Rng| Answers {
                q1: rng.random_bool(p),
                q2: rng.random_bool(p),
                q3: rng.random_bool(p),
            };
            let (a1, a2) = if llm == Slot::Preview1 { (0.8, 0.65) } else { (0.65, 0.8) };
            Judgment {
                item_id: item.item_id.clone(),
                preferred,
                preview_1: Some(answers(a1, &mut rng)),
                preview_2: Some(answers(a2, &mut rng)),
            }
        })
        .collect();

    let stats = summarize_campaign(&key, &judgments, TieConvention::ExcludeTies).unwrap();
    print!("{}", render_report(&stats, &ReportOptions::default()));
}

fn slot_pref(slot: Slot) -> Preference {
    match slot {
        Slot::Preview1 => Preference::Preview1,
        Slot::Preview2 => Preference::Preview2,
    }
}
