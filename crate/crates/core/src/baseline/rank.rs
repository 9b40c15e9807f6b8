use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::peaks::PeakWindow;
use super::series::SelectivitySeries;
use super::signals::{SignalKind, SignalSpan};
use super::BaselineError;
use crate::selector::{trim_to_window, PreviewSpan, PreviewSystem};
use crate::transcript::SentencizedTranscript;

/// `rank = selectivity * mean_selectivity - ad_overlap * ad_frac - position * position_frac`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankWeights {
    pub selectivity: f64,
    pub ad_overlap: f64,
    pub position: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        Self { selectivity: 1.0, ad_overlap: 2.0, position: 0.1 }
    }
}

impl RankWeights {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if [self.selectivity, self.ad_overlap, self.position].iter().any(|w| !(*w >= 0.0)) {
            return Err(BaselineError::InvalidConfig(format!("rank weights must be >= 0: {self:?}")));
        }
        Ok(())
    }

    pub fn score(&self, f: &CandidateFeatures) -> f64 {
        self.selectivity * f.mean_selectivity - self.ad_overlap * f.ad_overlap_frac - self.position * f.position_frac
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateFeatures {
    pub mean_selectivity: f64,
    pub ad_overlap_frac: f64,
    pub position_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub span: PreviewSpan,
    pub features: CandidateFeatures,
    pub rank_score: f64,
}

/// Length of `[start, end]` covered by the union of `intervals`.
fn covered_length(mut intervals: Vec<(f64, f64)>, start: f64, end: f64) -> f64 {
    intervals.retain(|(a, b)| *b > start && *a < end);
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut cursor = start;
    for (a, b) in intervals {
        let lo = a.max(cursor);
        let hi = b.min(end);
        if hi > lo {
            total += hi - lo;
            cursor = hi;
        }
    }
    total
}

/// Sentence whose start is nearest the window start among those starting
/// before the window ends.
fn anchor_sentence(t: &SentencizedTranscript, window: &PeakWindow) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for s in t.sentences.iter().take_while(|s| s.start_s < window.end_s) {
        let d = (s.start_s - window.start_s).abs();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((s.index, d));
        }
    }
    best.map_or(0, |(i, _)| i)
}

pub fn candidate_features(
    span: &PreviewSpan,
    series: &SelectivitySeries,
    ad_spans: &[(f64, f64)],
    episode_len_s: f64,
) -> CandidateFeatures {
    let duration = span.duration_s();
    let ad_overlap_frac = if duration > 0.0 {
        (covered_length(ad_spans.to_vec(), span.start_s, span.end_s) / duration).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let position_frac = if episode_len_s > 0.0 { (span.start_s / episode_len_s).clamp(0.0, 1.0) } else { 0.0 };
    CandidateFeatures { mean_selectivity: series.mean_over(span.start_s, span.end_s), ad_overlap_frac, position_frac }
}

fn rank_order(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.rank_score
        .total_cmp(&a.rank_score)
        .then(a.span.start_s.total_cmp(&b.span.start_s))
        .then(a.span.first_sentence.cmp(&b.span.first_sentence))
}

/// Aligns each window to sentences, trims it, scores it, and sorts best first.
/// Windows that land on an already-used first sentence are dropped.
pub fn trim_and_rank(
    t: &SentencizedTranscript,
    windows: &[PeakWindow],
    series: &SelectivitySeries,
    detector_spans: &[SignalSpan],
    weights: &RankWeights,
    window_s: f64,
) -> Result<Vec<RankedCandidate>, BaselineError> {
    weights.validate()?;
    let ads: Vec<(f64, f64)> = detector_spans
        .iter()
        .filter(|s| s.kind == SignalKind::Ad && s.score > 0.0)
        .map(|s| (s.start_s, s.end_s))
        .collect();
    let episode_len = t.end_s().max(series.duration_s());
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(windows.len());
    for w in windows {
        let first = anchor_sentence(t, w);
        if !seen.insert(first) {
            continue;
        }
        let span = trim_to_window(t, first, window_s, PreviewSystem::Baseline)
            .map_err(|e| BaselineError::InvalidConfig(e.to_string()))?;
        let features = candidate_features(&span, series, &ads, episode_len);
        let rank_score = weights.score(&features);
        out.push(RankedCandidate { span, features, rank_score });
    }
    out.sort_by(rank_order);
    Ok(out)
}
