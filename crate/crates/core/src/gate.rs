//! English-only eligibility filter.
//!
//! The LLM path trusts metadata tags alone. The legacy path ORs the metadata
//! decision with a pluggable language detector above a confidence threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::Episode;

pub const DEFAULT_DETECTOR_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSource {
    MetadataOnly,
    MetadataPlusDetector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageDecision {
    pub eligible: bool,
    pub source: DecisionSource,
    pub matched_tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub code: String,
    pub confidence: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("language detector failed on episode {episode_id}: {reason}")]
    DetectorFailure { episode_id: String, reason: String },
}

/// Spoken-language identification plug-in. Implementations declare their own
/// thread-safety; the gate calls `detect` at most once per episode.
pub trait LanguageDetector {
    fn detect(&self, episode: &Episode) -> Result<Detection, String>;
}

fn is_english_tag(tag: &str) -> bool {
    let primary = tag.split('-').next().unwrap_or("");
    primary.trim().eq_ignore_ascii_case("en")
}

/// Eligible iff some tag's primary subtag is `en`, case-insensitively.
pub fn filter_metadata(episode: &Episode) -> LanguageDecision {
    let matched_tag = episode.language_tags.iter().find(|t| is_english_tag(t)).cloned();
    LanguageDecision { eligible: matched_tag.is_some(), source: DecisionSource::MetadataOnly, matched_tag }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GateConfig {
    pub detector_threshold: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self { detector_threshold: DEFAULT_DETECTOR_THRESHOLD }
    }
}

impl GateConfig {
    pub fn filter_combined(
        &self,
        episode: &Episode,
        detector: &dyn LanguageDetector,
    ) -> Result<LanguageDecision, GateError> {
        let meta = filter_metadata(episode);
        if meta.eligible {
            return Ok(LanguageDecision { source: DecisionSource::MetadataPlusDetector, ..meta });
        }
        let failure = |reason: String| GateError::DetectorFailure { episode_id: episode.episode_id.clone(), reason };
        let found = detector.detect(episode).map_err(failure)?;
        if !(0.0..=1.0).contains(&found.confidence) {
            return Err(failure(format!("confidence {} outside [0, 1]", found.confidence)));
        }
        let eligible = is_english_tag(&found.code) && found.confidence >= self.detector_threshold;
        Ok(LanguageDecision { eligible, source: DecisionSource::MetadataPlusDetector, matched_tag: None })
    }
}

/// Metadata OR detector with the default threshold.
pub fn filter_combined(episode: &Episode, detector: &dyn LanguageDetector) -> Result<LanguageDecision, GateError> {
    GateConfig::default().filter_combined(episode, detector)
}

const ENGLISH_STOPWORDS: &[&str] = &[
    "the", "and", "a", "to", "of", "in", "is", "it", "that", "you", "i", "for", "on", "was", "with", "this", "but",
    "are", "be", "so", "we", "they", "have", "not", "what", "like", "just", "at", "or", "he", "she", "my", "do", "if",
    "about", "there", "can", "all",
];

/// Reference detector: share of transcript tokens found in a small English
/// stopword list, scaled so ordinary English speech lands near 1.
#[derive(Debug, Clone, Default)]
pub struct StopwordDetector;

impl LanguageDetector for StopwordDetector {
    fn detect(&self, episode: &Episode) -> Result<Detection, String> {
        let text: Vec<String> = match (&episode.words, &episode.sentences) {
            (Some(w), _) if !w.is_empty() => w.iter().map(|w| w.text.clone()).collect(),
            (_, Some(s)) => s.iter().map(|s| s.text.clone()).collect(),
            _ => return Err("no transcript text".into()),
        };
        let tokens: Vec<String> = text
            .iter()
            .flat_map(|t| t.split_whitespace())
            .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err("no transcript tokens".into());
        }
        let hits = tokens.iter().filter(|t| ENGLISH_STOPWORDS.contains(&t.as_str())).count();
        // conversational English runs around 35-50% stopwords
        let confidence = (hits as f64 / tokens.len() as f64 / 0.35).min(1.0);
        Ok(Detection { code: "en".into(), confidence })
    }
}
