use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BaselineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    TopicSentiment,
    Ad,
    Music,
    NonSpeech,
    Other,
}

impl SignalKind {
    pub fn is_detector(self) -> bool {
        self != SignalKind::TopicSentiment
    }
}

/// A scored time interval. Topic-sentiment spans carry an intensity `>= 0`;
/// detector spans carry a confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpan {
    pub kind: SignalKind,
    pub start_s: f64,
    pub end_s: f64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SignalSpan {
    pub fn new(kind: SignalKind, start_s: f64, end_s: f64, score: f64) -> Self {
        Self { kind, start_s, end_s, score, label: None }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        let ok_range = match self.kind {
            SignalKind::TopicSentiment => self.score >= 0.0 && self.score.is_finite(),
            _ => (0.0..=1.0).contains(&self.score),
        };
        if !(self.start_s < self.end_s) || !self.start_s.is_finite() || !self.end_s.is_finite() {
            return Err(BaselineError::InvalidSpan(format!(
                "{:?} span [{}, {}) is empty or not finite",
                self.kind, self.start_s, self.end_s
            )));
        }
        if !ok_range {
            return Err(BaselineError::InvalidSpan(format!("{:?} score {} outside its range", self.kind, self.score)));
        }
        Ok(())
    }
}

/// Multiplier per detector kind applied at full confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdjustmentTable(pub BTreeMap<SignalKind, f64>);

impl Default for AdjustmentTable {
    fn default() -> Self {
        Self(BTreeMap::from([
            (SignalKind::Ad, 0.0),
            (SignalKind::Music, 0.3),
            (SignalKind::NonSpeech, 0.2),
            (SignalKind::Other, 1.0),
        ]))
    }
}

impl AdjustmentTable {
    /// Unlisted kinds are neutral.
    pub fn multiplier(&self, kind: SignalKind) -> f64 {
        self.0.get(&kind).copied().unwrap_or(1.0)
    }

    pub fn set(&mut self, kind: SignalKind, multiplier: f64) {
        self.0.insert(kind, multiplier);
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        for (kind, m) in &self.0 {
            if !(0.0..=1.0).contains(m) {
                return Err(BaselineError::InvalidConfig(format!("adjustment for {kind:?} is {m}, expected [0, 1]")));
            }
        }
        Ok(())
    }

    /// `1 - confidence * (1 - table[kind])`.
    pub fn effective(&self, kind: SignalKind, confidence: f64) -> f64 {
        1.0 - confidence * (1.0 - self.multiplier(kind))
    }
}
