//! Scorer and detector plug-ins plus transparent reference implementations.

use std::collections::{BTreeMap, HashMap};

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use super::signals::{SignalKind, SignalSpan};
use crate::transcript::{Episode, SentencizedTranscript};

/// Produces topic-sentiment spans for one episode.
pub trait PrimaryScorer: Send + Sync {
    fn score(&self, episode: &Episode, transcript: &SentencizedTranscript) -> Result<Vec<SignalSpan>, String>;
}

/// Produces ad / music / non-speech spans for one episode.
pub trait SignalDetector: Send + Sync {
    fn detect(&self, episode: &Episode, transcript: &SentencizedTranscript) -> Result<Vec<SignalSpan>, String>;
}

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
}

/// Per-sentence intensity from a word-weight lexicon, labeled with the topic
/// whose keyword set has the most hits in that sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexiconScorer {
    pub lexicon: HashMap<String, f64>,
    pub topics: BTreeMap<String, Vec<String>>,
}

impl Default for LexiconScorer {
    fn default() -> Self {
        let lexicon = [
            ("amazing", 1.0),
            ("incredible", 1.0),
            ("surprising", 1.0),
            ("crazy", 0.8),
            ("fascinating", 1.0),
            ("love", 0.6),
            ("hate", 0.6),
            ("secret", 0.8),
            ("discover", 0.7),
            ("discovered", 0.7),
            ("wild", 0.7),
            ("why", 0.3),
            ("imagine", 0.6),
            ("never", 0.4),
            ("best", 0.5),
            ("worst", 0.5),
            ("shocking", 1.0),
            ("huge", 0.5),
            ("finally", 0.4),
            ("truth", 0.6),
            ("weird", 0.6),
            ("study", 0.4),
            ("research", 0.4),
            ("really", 0.2),
        ]
        .into_iter()
        .map(|(w, s)| (w.to_string(), s))
        .collect();
        Self { lexicon, topics: BTreeMap::new() }
    }
}

impl LexiconScorer {
    fn topic_for(&self, words: &[String]) -> Option<String> {
        let mut best: Option<(&String, usize)> = None;
        for (topic, keys) in &self.topics {
            let hits = words.iter().filter(|w| keys.iter().any(|k| k.eq_ignore_ascii_case(w))).count();
            if hits > 0 && best.is_none_or(|(_, b)| hits > b) {
                best = Some((topic, hits));
            }
        }
        best.map(|(t, _)| t.clone())
    }
}

impl PrimaryScorer for LexiconScorer {
    fn score(&self, _episode: &Episode, transcript: &SentencizedTranscript) -> Result<Vec<SignalSpan>, String> {
        Ok(transcript
            .sentences
            .iter()
            .filter_map(|s| {
                let words: Vec<String> = tokens(&s.text).collect();
                let intensity: f64 = words.iter().filter_map(|w| self.lexicon.get(w)).sum();
                (intensity > 0.0).then(|| SignalSpan {
                    kind: SignalKind::TopicSentiment,
                    start_s: s.start_s,
                    end_s: s.end_s,
                    score: intensity,
                    label: self.topic_for(&words),
                })
            })
            .collect())
    }
}

/// Marks sentences matching an ad cue (case-insensitive regex) as ads.
#[derive(Debug, Clone)]
pub struct AdCueDetector {
    cues: Vec<Regex>,
    confidence: f64,
}

pub const DEFAULT_AD_CUES: &[&str] = &[
    r"sponsored by",
    r"use (promo )?code",
    r"promo code",
    r"brought to you by",
    r"(this|today's) episode is (supported|sponsored) by",
    r"\b\d{1,2}% off\b",
    r"free trial",
];

impl AdCueDetector {
    pub fn new<S: AsRef<str>>(cues: &[S], confidence: f64) -> Result<Self, String> {
        let cues = cues
            .iter()
            .map(|c| {
                RegexBuilder::new(c.as_ref())
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| format!("ad cue {:?}: {e}", c.as_ref()))
            })
            .collect::<Result<_, _>>()?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(format!("confidence {confidence} outside [0, 1]"));
        }
        Ok(Self { cues, confidence })
    }
}

impl Default for AdCueDetector {
    fn default() -> Self {
        Self::new(DEFAULT_AD_CUES, 1.0).expect("default cues compile")
    }
}

impl SignalDetector for AdCueDetector {
    fn detect(&self, _episode: &Episode, transcript: &SentencizedTranscript) -> Result<Vec<SignalSpan>, String> {
        Ok(transcript
            .sentences
            .iter()
            .filter(|s| self.cues.iter().any(|re| re.is_match(&s.text)))
            .map(|s| SignalSpan::new(SignalKind::Ad, s.start_s, s.end_s, self.confidence))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::Sentence;

    fn setup(texts: &[&str]) -> (Episode, SentencizedTranscript) {
        let sentences: Vec<Sentence> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Sentence {
                index: i,
                text: t.to_string(),
                start_s: i as f64 * 5.0,
                end_s: i as f64 * 5.0 + 4.0,
            })
            .collect();
        let ep = Episode {
            episode_id: "e".into(),
            title: String::new(),
            description: String::new(),
            show_name: String::new(),
            language_tags: vec![],
            words: None,
            sentences: Some(sentences.clone()),
        };
        (ep, SentencizedTranscript::new("e", sentences).unwrap())
    }

    #[test]
    fn lexicon_scores_and_labels() {
        let (ep, t) = setup(&["This is amazing and surprising!", "Plain words here.", "Dreams are weird."]);
        let mut scorer = LexiconScorer::default();
        scorer.topics.insert("dreams".into(), vec!["dreams".into(), "sleep".into()]);
        let spans = scorer.score(&ep, &t).unwrap();
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].score, 2.0);
        assert_eq!(spans[0].label, None);
        assert_eq!(spans[1].label.as_deref(), Some("dreams"));
        assert_eq!((spans[1].start_s, spans[1].end_s), (10.0, 14.0));
    }

    #[test]
    fn ad_cues_match_case_insensitively() {
        let (ep, t) =
            setup(&["Hello.", "This episode is Sponsored By Acme.", "Use code DREAM for 20% off.", "Back to it."]);
        let spans = AdCueDetector::default().detect(&ep, &t).unwrap();
        let starts: Vec<f64> = spans.iter().map(|s| s.start_s).collect();
        assert_eq!(starts, vec![5.0, 10.0]);
        assert!(spans.iter().all(|s| s.kind == SignalKind::Ad && s.score == 1.0));
        assert!(AdCueDetector::new(&["("], 1.0).is_err());
    }
}
