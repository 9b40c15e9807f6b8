//! Blind A/B preference campaigns and their significance statistics.
//!
//! A campaign pairs an LLM preview with a baseline preview per episode and
//! puts the LLM preview in slot 1 or 2 by a seeded coin flip. The export
//! omits the assignment; it lives in a separate key file and is only read
//! back when judgments are unblinded in [`summarize_campaign`].

mod report;
mod stats;

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{render_report, ReportOptions};
pub use stats::{binomial_two_sided, binomial_two_sided_normal, normal_two_sided, two_proportion_z, ZTest};

use crate::selector::PreviewSpan;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("pair {index} mixes episodes {llm:?} and {ml:?}")]
    MismatchedEpisode { index: usize, llm: String, ml: String },
    #[error("judgment references unknown item {0:?}")]
    UnknownItem(String),
    #[error("{path}:{line}: {reason}")]
    Jsonl { path: String, line: usize, reason: String },
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "preview_1")]
    Preview1,
    #[serde(rename = "preview_2")]
    Preview2,
}

impl Slot {
    pub fn other(self) -> Self {
        match self {
            Slot::Preview1 => Slot::Preview2,
            Slot::Preview2 => Slot::Preview1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeInfo {
    pub episode_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub show_name: String,
}

/// Input line for campaign building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignPair {
    pub episode: EpisodeInfo,
    pub llm: PreviewSpan,
    pub ml: PreviewSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationItem {
    pub item_id: String,
    #[serde(flatten)]
    pub episode: EpisodeInfo,
    pub preview_1: PreviewSpan,
    pub preview_2: PreviewSpan,
    /// Slot holding the LLM preview.
    pub hidden_assignment: Slot,
    pub shuffle_seed: u64,
}

impl EvaluationItem {
    /// JSON line without the assignment or anything else naming the system.
    pub fn to_blind_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("item serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("hidden_assignment");
            for slot in ["preview_1", "preview_2"] {
                if let Some(p) = obj.get_mut(slot).and_then(|p| p.as_object_mut()) {
                    p.remove("system");
                    p.remove("snap_drift_s");
                }
            }
        }
        v.to_string()
    }

    pub fn key(&self) -> AssignmentKey {
        AssignmentKey {
            item_id: self.item_id.clone(),
            llm_slot: self.hidden_assignment,
            shuffle_seed: self.shuffle_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentKey {
    pub item_id: String,
    pub llm_slot: Slot,
    #[serde(default)]
    pub shuffle_seed: u64,
}

/// item_id → slot holding the LLM preview.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CampaignKey {
    slots: HashMap<String, Slot>,
    order: Vec<String>,
}

impl CampaignKey {
    pub fn from_items(items: &[EvaluationItem]) -> Self {
        Self::from_keys(items.iter().map(EvaluationItem::key))
    }

    pub fn from_keys(keys: impl IntoIterator<Item = AssignmentKey>) -> Self {
        let mut k = Self::default();
        for key in keys {
            if k.slots.insert(key.item_id.clone(), key.llm_slot).is_none() {
                k.order.push(key.item_id);
            }
        }
        k
    }

    pub fn llm_slot(&self, item_id: &str) -> Option<Slot> {
        self.slots.get(item_id).copied()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn item_ids(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }
}

/// One fair coin per pair from a ChaCha8 stream seeded with `seed`.
pub fn build_campaign(pairs: &[CampaignPair], seed: u64) -> Result<Vec<EvaluationItem>, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let id = &pair.episode.episode_id;
            if &pair.llm.episode_id != id || &pair.ml.episode_id != id {
                return Err(EvalError::MismatchedEpisode {
                    index: i,
                    llm: pair.llm.episode_id.clone(),
                    ml: pair.ml.episode_id.clone(),
                });
            }
            let llm_first = rng.random_bool(0.5);
            let (preview_1, preview_2, hidden_assignment) = if llm_first {
                (pair.llm.clone(), pair.ml.clone(), Slot::Preview1)
            } else {
                (pair.ml.clone(), pair.llm.clone(), Slot::Preview2)
            };
            Ok(EvaluationItem {
                item_id: format!("item-{i:05}"),
                episode: pair.episode.clone(),
                preview_1,
                preview_2,
                hidden_assignment,
                shuffle_seed: seed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    #[serde(rename = "preview_1")]
    Preview1,
    #[serde(rename = "preview_2")]
    Preview2,
    Tie,
}

/// Yes/no answers for one preview: understandability, contextual clarity,
/// interest level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answers {
    pub q1: bool,
    pub q2: bool,
    pub q3: bool,
}

impl Answers {
    fn get(&self, q: usize) -> bool {
        [self.q1, self.q2, self.q3][q]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub item_id: String,
    pub preferred: Preference,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preview_1: Option<Answers>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preview_2: Option<Answers>,
}

impl Judgment {
    fn answers(&self, slot: Slot) -> Option<Answers> {
        match slot {
            Slot::Preview1 => self.preview_1,
            Slot::Preview2 => self.preview_2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieConvention {
    /// Test LLM wins against LLM wins + ML wins.
    #[default]
    ExcludeTies,
    /// Ties count as trials the LLM did not win.
    TiesAsLosses,
    /// Ties count as LLM successes (non-inferiority).
    TiesAsWins,
}

impl std::str::FromStr for TieConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exclude_ties" | "exclude" => Ok(Self::ExcludeTies),
            "ties_as_losses" | "losses" => Ok(Self::TiesAsLosses),
            "ties_as_wins" | "wins" => Ok(Self::TiesAsWins),
            other => Err(format!("unknown tie convention {other:?}")),
        }
    }
}

pub const QUESTION_NAMES: [&str; 3] = ["Understandability", "Contextual clarity", "Interest level"];

/// Per-question z-test. The first sample is the baseline, so a negative z
/// means LLM previews got more yes answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionStat {
    pub question: String,
    pub llm_yes: u64,
    pub ml_yes: u64,
    pub n: u64,
    pub z: f64,
    pub p: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub n_items: u64,
    pub n_unanswered: u64,
    pub duplicate_judgments: u64,
    pub llm_wins: u64,
    pub ml_wins: u64,
    pub ties: u64,
    pub win_rate: f64,
    pub win_or_tie_rate: f64,
    pub convention: TieConvention,
    pub binomial_k: u64,
    pub binomial_n: u64,
    /// `None` when the convention leaves no informative trials.
    pub binomial_p: Option<f64>,
    pub no_informative: bool,
    pub per_question: Vec<QuestionStat>,
}

/// Unblinds judgments and computes win/tie counts, the binomial test under
/// `convention`, and per-question z-tests. Duplicate judgments keep the first.
pub fn summarize_campaign(
    key: &CampaignKey,
    judgments: &[Judgment],
    convention: TieConvention,
) -> Result<CampaignStats, EvalError> {
    let mut seen = HashSet::new();
    let mut duplicates = 0u64;
    let (mut llm_wins, mut ml_wins, mut ties) = (0u64, 0u64, 0u64);
    let mut yes = [[0u64; 2]; 3]; // [question][llm, ml]
    let mut answered = 0u64;

    for j in judgments {
        let llm_slot = key.llm_slot(&j.item_id).ok_or_else(|| EvalError::UnknownItem(j.item_id.clone()))?;
        if !seen.insert(j.item_id.as_str()) {
            duplicates += 1;
            log::warn!("duplicate judgment for {}; keeping the first", j.item_id);
            continue;
        }
        match (j.preferred, llm_slot) {
            (Preference::Tie, _) => ties += 1,
            (Preference::Preview1, Slot::Preview1) | (Preference::Preview2, Slot::Preview2) => llm_wins += 1,
            _ => ml_wins += 1,
        }
        if let (Some(llm), Some(ml)) = (j.answers(llm_slot), j.answers(llm_slot.other())) {
            answered += 1;
            for (q, counts) in yes.iter_mut().enumerate() {
                counts[0] += u64::from(llm.get(q));
                counts[1] += u64::from(ml.get(q));
            }
        }
    }

    let n_items = llm_wins + ml_wins + ties;
    let rate = |x: u64| if n_items == 0 { 0.0 } else { x as f64 / n_items as f64 };
    let (binomial_k, binomial_n) = match convention {
        TieConvention::ExcludeTies => (llm_wins, llm_wins + ml_wins),
        TieConvention::TiesAsLosses => (llm_wins, n_items),
        TieConvention::TiesAsWins => (llm_wins + ties, n_items),
    };
    let binomial_p = if binomial_n == 0 { None } else { Some(binomial_two_sided(binomial_k, binomial_n)?) };

    let per_question = if answered == 0 {
        Vec::new()
    } else {
        yes.iter()
            .zip(QUESTION_NAMES)
            .map(|(&[llm_yes, ml_yes], name)| {
                let t = two_proportion_z(ml_yes, answered, llm_yes, answered)?;
                Ok(QuestionStat {
                    question: name.to_string(),
                    llm_yes,
                    ml_yes,
                    n: answered,
                    z: t.z,
                    p: t.p,
                    degenerate: t.degenerate,
                })
            })
            .collect::<Result<_, EvalError>>()?
    };

    Ok(CampaignStats {
        n_items,
        n_unanswered: key.item_ids().filter(|id| !seen.contains(id)).count() as u64,
        duplicate_judgments: duplicates,
        llm_wins,
        ml_wins,
        ties,
        win_rate: rate(llm_wins),
        win_or_tie_rate: rate(llm_wins + ties),
        convention,
        binomial_k,
        binomial_n,
        binomial_p,
        no_informative: binomial_p.is_none(),
        per_question,
    })
}

/// Reads one JSON value per non-blank line; unknown fields are ignored.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, EvalError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EvalError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| EvalError::Jsonl {
            path: path.display().to_string(),
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<(), EvalError> {
    let path = path.as_ref();
    let io = |e: std::io::Error| EvalError::Io(format!("{}: {e}", path.display()));
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for r in rows {
        writeln!(w, "{}", serde_json::to_string(r).expect("row serializes")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes the blind item export and the separate assignment key.
pub fn export_campaign(
    items: &[EvaluationItem],
    items_path: impl AsRef<Path>,
    key_path: impl AsRef<Path>,
) -> Result<(), EvalError> {
    let items_path = items_path.as_ref();
    let io = |e: std::io::Error| EvalError::Io(format!("{}: {e}", items_path.display()));
    let mut w = std::io::BufWriter::new(std::fs::File::create(items_path).map_err(io)?);
    for item in items {
        writeln!(w, "{}", item.to_blind_json()).map_err(io)?;
    }
    w.flush().map_err(io)?;
    let keys: Vec<AssignmentKey> = items.iter().map(EvaluationItem::key).collect();
    write_jsonl(key_path, &keys)
}
