use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::signals::{AdjustmentTable, SignalKind, SignalSpan};
use super::BaselineError;

/// Per-cell fused score. Cell `i` covers `[i * resolution_s, (i + 1) * resolution_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectivitySeries {
    pub resolution_s: f64,
    pub values: Vec<f64>,
}

/// Grid dimensions: `ceil(episode_end_s / resolution_s)` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub episode_end_s: f64,
    pub resolution_s: f64,
}

impl GridShape {
    pub fn new(episode_end_s: f64, resolution_s: f64) -> Self {
        Self { episode_end_s, resolution_s }
    }

    pub fn cells(&self) -> usize {
        // the epsilon absorbs division noise such as 6.0 / 0.1
        ((self.episode_end_s / self.resolution_s) - 1e-9).ceil().max(0.0) as usize
    }
}

impl SelectivitySeries {
    pub fn zeros(shape: GridShape) -> Result<Self, BaselineError> {
        if !(shape.resolution_s > 0.0) || !(shape.episode_end_s >= 0.0) {
            return Err(BaselineError::InvalidConfig(format!(
                "grid needs positive resolution and non-negative length, got {shape:?}"
            )));
        }
        Ok(Self { resolution_s: shape.resolution_s, values: vec![0.0; shape.cells()] })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.values.len() as f64 * self.resolution_s
    }

    /// Cells whose midpoint falls in `[start_s, end_s)`.
    pub fn cell_range(&self, start_s: f64, end_s: f64) -> std::ops::Range<usize> {
        let lo = ((start_s / self.resolution_s) - 0.5).ceil().max(0.0) as usize;
        let hi = ((end_s / self.resolution_s) - 0.5).ceil().max(0.0) as usize;
        let hi = hi.min(self.values.len());
        lo.min(hi)..hi
    }

    fn check_bounds(&self, span: &SignalSpan) -> Result<(), BaselineError> {
        if span.start_s < 0.0 || span.end_s > self.duration_s() + 1e-9 {
            return Err(BaselineError::SpanOutOfBounds {
                start_s: span.start_s,
                end_s: span.end_s,
                episode_end_s: self.duration_s(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { resolution_s: self.resolution_s, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Mean over cells covered by `[start_s, end_s)`; 0 when none are.
    pub fn mean_over(&self, start_s: f64, end_s: f64) -> f64 {
        let r = self.cell_range(start_s, end_s);
        if r.is_empty() {
            return 0.0;
        }
        let n = r.len() as f64;
        self.values[r].iter().sum::<f64>() / n
    }

    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|v| *v <= 0.0)
    }
}

/// Centered moving average of odd `width`; edge windows average only the cells
/// that exist.
pub fn smooth(values: &[f64], width: usize) -> Result<Vec<f64>, BaselineError> {
    if width == 0 || width.is_multiple_of(2) {
        return Err(BaselineError::InvalidConfig(format!("smoothing width must be odd and positive, got {width}")));
    }
    let half = width / 2;
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    Ok((0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryAggregate {
    pub series: SelectivitySeries,
    /// Label with the greatest summed intensity; ties go to the smaller label.
    pub dominant_topic: Option<String>,
    pub topic_totals: BTreeMap<String, f64>,
}

/// Sums topic-sentiment intensities per cell, then smooths.
pub fn aggregate_primary(
    spans: &[SignalSpan],
    shape: GridShape,
    smoothing_width: usize,
) -> Result<PrimaryAggregate, BaselineError> {
    let mut series = SelectivitySeries::zeros(shape)?;
    let mut topic_totals: BTreeMap<String, f64> = BTreeMap::new();
    for span in spans {
        if span.kind != SignalKind::TopicSentiment {
            return Err(BaselineError::WrongKind { expected: "topic_sentiment", got: span.kind });
        }
        span.validate()?;
        series.check_bounds(span)?;
        let cells = series.cell_range(span.start_s, span.end_s);
        let covered = cells.len() as f64;
        for v in &mut series.values[cells] {
            *v += span.score;
        }
        if let Some(label) = &span.label {
            *topic_totals.entry(label.clone()).or_default() += span.score * covered;
        }
    }
    series.values = smooth(&series.values, smoothing_width)?;
    let dominant_topic = topic_totals
        .iter()
        .fold(None::<(&String, f64)>, |best, (k, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((k, v)),
        })
        .map(|(k, _)| k.clone());
    Ok(PrimaryAggregate { series, dominant_topic, topic_totals })
}

/// Scales each cell by the product of confidence-weighted multipliers of the
/// detector spans covering it.
pub fn apply_secondary(
    series: &SelectivitySeries,
    spans: &[SignalSpan],
    table: &AdjustmentTable,
) -> Result<SelectivitySeries, BaselineError> {
    table.validate()?;
    let mut out = series.clone();
    for span in spans {
        if !span.kind.is_detector() {
            return Err(BaselineError::WrongKind { expected: "detector", got: span.kind });
        }
        span.validate()?;
        out.check_bounds(span)?;
        let m = table.effective(span.kind, span.score);
        let cells = out.cell_range(span.start_s, span.end_s);
        for v in &mut out.values[cells] {
            *v *= m;
        }
    }
    Ok(out)
}
