//! Signal-fusion preview baseline.
//!
//! Primary topic-sentiment spans are summed onto a time grid and smoothed;
//! detector spans (ads, music, non-speech) scale the grid down by
//! confidence-weighted adjustment multipliers. The fused selectivity series
//! is scanned for the best non-overlapping windows, each window is aligned to
//! sentences with the selector's trim rule, and a small linear model ranks
//! the candidates.
//!
//! ```text
//! scorers ──► aggregate_primary ─┐
//!                                ├─► apply_secondary ─► select_peaks ─► trim_and_rank ─► top span
//! detectors ─────────────────────┘
//! ```

mod peaks;
mod plugins;
mod rank;
mod series;
mod signals;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use peaks::{select_peaks, window_cells, PeakSelection, PeakWindow};
pub use plugins::{AdCueDetector, LexiconScorer, PrimaryScorer, SignalDetector, DEFAULT_AD_CUES};
pub use rank::{candidate_features, trim_and_rank, CandidateFeatures, RankWeights, RankedCandidate};
pub use series::{aggregate_primary, apply_secondary, smooth, GridShape, PrimaryAggregate, SelectivitySeries};
pub use signals::{AdjustmentTable, SignalKind, SignalSpan};

use crate::selector::{snap_start, trim_to_window, PreviewSpan, PreviewSystem};
use crate::transcript::{Episode, SentencizedTranscript};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("span [{start_s}, {end_s}) outside episode [0, {episode_end_s})")]
    SpanOutOfBounds { start_s: f64, end_s: f64, episode_end_s: f64 },
    #[error("expected a {expected} span, got {got:?}")]
    WrongKind { expected: &'static str, got: SignalKind },
    #[error("invalid signal span: {0}")]
    InvalidSpan(String),
    #[error("invalid baseline config: {0}")]
    InvalidConfig(String),
    #[error("plug-in failed: {0}")]
    Plugin(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub resolution_s: f64,
    pub smoothing_width: usize,
    pub window_s: f64,
    pub candidates: usize,
    pub adjustments: AdjustmentTable,
    pub weights: RankWeights,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            resolution_s: 1.0,
            smoothing_width: 5,
            window_s: 60.0,
            candidates: 5,
            adjustments: AdjustmentTable::default(),
            weights: RankWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePreview {
    pub span: PreviewSpan,
    /// Best first; empty when the fallback was used.
    pub candidates: Vec<RankedCandidate>,
    pub dominant_topic: Option<String>,
    /// Nothing scored above zero, so the first window from t = 0 was used.
    pub degenerate: bool,
    pub series: SelectivitySeries,
}

fn fallback(t: &SentencizedTranscript, window_s: f64) -> Result<PreviewSpan, BaselineError> {
    let first = snap_start(t, 0.0).map_err(|e| BaselineError::InvalidConfig(e.to_string()))?;
    let mut span = trim_to_window(t, first.index, window_s, PreviewSystem::Baseline)
        .map_err(|e| BaselineError::InvalidConfig(e.to_string()))?;
    span.snap_drift_s = first.drift_s;
    Ok(span)
}

/// Runs the whole fusion pipeline and returns the top-ranked span.
pub fn extract_baseline_preview(
    episode: &Episode,
    transcript: &SentencizedTranscript,
    scorers: &[&dyn PrimaryScorer],
    detectors: &[&dyn SignalDetector],
    config: &BaselineConfig,
) -> Result<BaselinePreview, BaselineError> {
    let shape = GridShape::new(transcript.end_s(), config.resolution_s);

    let mut primary = Vec::new();
    for s in scorers {
        primary.extend(s.score(episode, transcript).map_err(BaselineError::Plugin)?);
    }
    let mut secondary = Vec::new();
    for d in detectors {
        secondary.extend(d.detect(episode, transcript).map_err(BaselineError::Plugin)?);
    }

    let agg = aggregate_primary(&primary, shape, config.smoothing_width)?;
    let series = apply_secondary(&agg.series, &secondary, &config.adjustments)?;

    let degenerate = |series: SelectivitySeries| -> Result<BaselinePreview, BaselineError> {
        log::info!("episode {}: no usable selectivity, falling back to t=0", episode.episode_id);
        Ok(BaselinePreview {
            span: fallback(transcript, config.window_s)?,
            candidates: Vec::new(),
            dominant_topic: agg.dominant_topic.clone(),
            degenerate: true,
            series,
        })
    };
    if series.is_degenerate() {
        return degenerate(series);
    }

    let peaks = select_peaks(&series, config.window_s, config.candidates)?;
    let candidates = trim_and_rank(transcript, &peaks.windows, &series, &secondary, &config.weights, config.window_s)?;
    let Some(top) = candidates.first() else {
        return degenerate(series);
    };
    Ok(BaselinePreview {
        span: top.span.clone(),
        candidates: candidates.clone(),
        dominant_topic: agg.dominant_topic.clone(),
        degenerate: false,
        series,
    })
}
