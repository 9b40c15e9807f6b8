//! Sentence-aligned preview spans.
//!
//! A requested start is snapped to the nearest sentence start, then the span
//! keeps every following sentence that *starts* before `start + window_s`.
//! The model's requested end is advisory and never consulted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{PreviewChoice, PreviewMetadata};
use crate::transcript::SentencizedTranscript;

pub const DEFAULT_WINDOW_S: f64 = 60.0;
pub const DEFAULT_DRIFT_WARNING_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreviewSystem {
    Llm,
    Baseline,
}

impl PreviewSystem {
    pub fn as_str(self) -> &'static str {
        match self {
            PreviewSystem::Llm => "llm",
            PreviewSystem::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for PreviewSystem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "llm" => Ok(Self::Llm),
            "baseline" | "ml" => Ok(Self::Baseline),
            other => Err(format!("unknown system {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewSpan {
    pub episode_id: String,
    pub start_s: f64,
    pub end_s: f64,
    pub first_sentence: usize,
    pub last_sentence: usize,
    pub system: PreviewSystem,
    pub snap_drift_s: f64,
}

impl PreviewSpan {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectError {
    #[error("transcript is empty")]
    EmptyTranscript,
    #[error("sentence index {index} out of range for {len} sentences")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("window must be positive, got {0}")]
    InvalidWindow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snap {
    pub index: usize,
    pub drift_s: f64,
    /// Drift exceeded the warning threshold.
    pub warning: bool,
}

/// Nearest sentence start to `requested_start_s`; ties go to the earlier
/// sentence.
pub fn snap_start(t: &SentencizedTranscript, requested_start_s: f64) -> Result<Snap, SelectError> {
    snap_start_with(t, requested_start_s, DEFAULT_DRIFT_WARNING_S)
}

pub fn snap_start_with(
    t: &SentencizedTranscript,
    requested_start_s: f64,
    warn_drift_s: f64,
) -> Result<Snap, SelectError> {
    let mut best: Option<(usize, f64)> = None;
    for s in &t.sentences {
        let d = (s.start_s - requested_start_s).abs();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((s.index, d));
        }
    }
    let (index, drift_s) = best.ok_or(SelectError::EmptyTranscript)?;
    Ok(Snap { index, drift_s, warning: drift_s > warn_drift_s })
}

/// Keeps sentences `first..=last` where `last` is the final sentence starting
/// strictly before `sentence[first].start_s + window_s`.
pub fn trim_to_window(
    t: &SentencizedTranscript,
    first: usize,
    window_s: f64,
    system: PreviewSystem,
) -> Result<PreviewSpan, SelectError> {
    if !(window_s > 0.0) {
        return Err(SelectError::InvalidWindow(window_s));
    }
    let len = t.sentences.len();
    let head = t.sentences.get(first).ok_or(SelectError::IndexOutOfRange { index: first, len })?;
    let limit = head.start_s + window_s;
    let last = first + t.sentences[first + 1..].iter().take_while(|s| s.start_s < limit).count();
    Ok(PreviewSpan {
        episode_id: t.episode_id.clone(),
        start_s: head.start_s,
        end_s: t.sentences[last].end_s,
        first_sentence: first,
        last_sentence: last,
        system,
        snap_drift_s: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorConfig {
    pub window_s: f64,
    pub drift_warning_s: f64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self { window_s: DEFAULT_WINDOW_S, drift_warning_s: DEFAULT_DRIFT_WARNING_S }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmSelection {
    pub span: PreviewSpan,
    pub metadata: PreviewMetadata,
    pub snap_warning: bool,
}

/// Snap, then trim. The choice's end timestamp is ignored.
pub fn select_llm_preview(
    t: &SentencizedTranscript,
    choice: &PreviewChoice,
    config: &SelectorConfig,
) -> Result<LlmSelection, SelectError> {
    let snap = snap_start_with(t, choice.preview_start_s, config.drift_warning_s)?;
    if snap.warning {
        log::warn!(
            "episode {}: requested start {:.2}s snapped {:.2}s away",
            t.episode_id,
            choice.preview_start_s,
            snap.drift_s
        );
    }
    let mut span = trim_to_window(t, snap.index, config.window_s, PreviewSystem::Llm)?;
    span.snap_drift_s = snap.drift_s;
    Ok(LlmSelection { span, metadata: choice.metadata.clone(), snap_warning: snap.warning })
}

/// Persisted preview record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewRecord {
    pub episode_id: String,
    pub system: PreviewSystem,
    pub start_s: f64,
    pub end_s: f64,
    pub first_sentence: usize,
    pub last_sentence: usize,
    pub snap_drift_s: f64,
    #[serde(default)]
    pub metadata: Option<PreviewMetadata>,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub snap_warning: bool,
    /// Baseline fell back to the first window.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl PreviewRecord {
    pub fn new(span: &PreviewSpan, metadata: Option<PreviewMetadata>) -> Self {
        Self {
            episode_id: span.episode_id.clone(),
            system: span.system,
            start_s: span.start_s,
            end_s: span.end_s,
            first_sentence: span.first_sentence,
            last_sentence: span.last_sentence,
            snap_drift_s: span.snap_drift_s,
            metadata,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            snap_warning: false,
            degenerate: false,
        }
    }

    pub fn from_llm(selection: &LlmSelection) -> Self {
        let mut r = Self::new(&selection.span, Some(selection.metadata.clone()));
        r.snap_warning = selection.snap_warning;
        r
    }

    pub fn span(&self) -> PreviewSpan {
        PreviewSpan {
            episode_id: self.episode_id.clone(),
            start_s: self.start_s,
            end_s: self.end_s,
            first_sentence: self.first_sentence,
            last_sentence: self.last_sentence,
            system: self.system,
            snap_drift_s: self.snap_drift_s,
        }
    }
}

/// Checks a span against its transcript: sentence alignment plus the window
/// rule in both directions.
pub fn check_span(t: &SentencizedTranscript, span: &PreviewSpan, window_s: f64) -> Result<(), String> {
    let first = t.sentences.get(span.first_sentence).ok_or("first_sentence out of range")?;
    let last = t.sentences.get(span.last_sentence).ok_or("last_sentence out of range")?;
    if span.first_sentence > span.last_sentence {
        return Err("first_sentence after last_sentence".into());
    }
    if span.start_s != first.start_s {
        return Err(format!("start {} is not sentence start {}", span.start_s, first.start_s));
    }
    if span.end_s != last.end_s {
        return Err(format!("end {} is not sentence end {}", span.end_s, last.end_s));
    }
    if !(last.start_s < span.start_s + window_s) {
        return Err("last sentence starts outside the window".into());
    }
    if let Some(next) = t.sentences.get(span.last_sentence + 1) {
        if next.start_s < span.start_s + window_s {
            return Err("a sentence starting inside the window was dropped".into());
        }
    }
    Ok(())
}
