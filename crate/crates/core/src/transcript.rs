//! Word-timed transcripts, punctuation sentencization, and the
//! `[SS.ss - SS.ss] text` timestamped line format handed to the model.
//!
//! A rendered transcript looks like:
//!
//! ```text
//! [01.00 - 02.50] Here is a mock sentence indicating the start of the transcript.
//! [03.00 - 05.25] This is another mock sentence serving as a placeholder.
//! ```
//!
//! Timestamps carry two decimals (half away from zero) and an integer part
//! padded to at least two digits. Lines are joined by `\n` with no trailing
//! newline.

use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;
use thiserror::Error;

/// Largest backwards step between consecutive timestamps treated as jitter.
pub const TIMESTAMP_JITTER_S: f64 = 0.5;

/// Smallest duration a sentence may have once rendered (one hundredth).
const MIN_SENTENCE_S: f64 = 0.01;

pub const DEFAULT_ABBREVIATIONS: &[&str] = &["Dr.", "Mr.", "Mrs.", "Ms.", "St.", "vs.", "etc.", "U.S.", "e.g.", "i.e."];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranscriptError {
    #[error("transcript has no words or sentences")]
    EmptyTranscript,
    #[error("timestamps regress by {regression_s:.3}s at position {position}")]
    NonMonotonicTimestamps { position: usize, regression_s: f64 },
    #[error("invalid word at position {position}: {reason}")]
    InvalidWord { position: usize, reason: String },
    #[error("invalid sentence {index}: {reason}")]
    InvalidSentence { index: usize, reason: String },
    #[error("sentences {index} and {next} overlap by {overlap_s:.3}s")]
    OverlappingSentences { index: usize, next: usize, overlap_s: f64 },
    #[error("line {line}: malformed timestamped line {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("invalid episode: {0}")]
    InvalidEpisode(String),
    #[error("episode JSON: {0}")]
    Json(String),
    #[error("reading {path}: {reason}")]
    Io { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, TranscriptError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl Word {
    pub fn new(text: impl Into<String>, start_s: f64, end_s: f64) -> Self {
        Self { text: text.into(), start_s, end_s }
    }

    fn check(&self, position: usize) -> Result<()> {
        let bad = |reason: &str| TranscriptError::InvalidWord { position, reason: reason.to_string() };
        if self.text.is_empty() {
            return Err(bad("empty text"));
        }
        if self.text.chars().any(char::is_whitespace) {
            return Err(bad("text contains whitespace"));
        }
        if !self.start_s.is_finite() || !self.end_s.is_finite() || self.start_s < 0.0 {
            return Err(bad("timestamps must be finite and non-negative"));
        }
        if self.start_s > self.end_s {
            return Err(bad("start_s after end_s"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl Sentence {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// An indexed, timestamped sentence list; the addressing scheme for every
/// preview offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencizedTranscript {
    pub episode_id: String,
    pub sentences: Vec<Sentence>,
}

impl SentencizedTranscript {
    /// Builds a transcript after checking every sentence and ordering invariant.
    pub fn new(episode_id: impl Into<String>, sentences: Vec<Sentence>) -> Result<Self> {
        let t = Self { episode_id: episode_id.into(), sentences };
        t.validate()?;
        Ok(t)
    }

    pub fn with_episode_id(mut self, episode_id: impl Into<String>) -> Self {
        self.episode_id = episode_id.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sentences.is_empty() {
            return Err(TranscriptError::EmptyTranscript);
        }
        for (pos, s) in self.sentences.iter().enumerate() {
            let bad = |reason: &str| TranscriptError::InvalidSentence { index: pos, reason: reason.to_string() };
            if s.index != pos {
                return Err(bad("indices must be contiguous from 0"));
            }
            if s.text.trim().is_empty() {
                return Err(bad("empty text"));
            }
            if s.text.contains(['\n', '\r']) {
                return Err(bad("text contains a line break"));
            }
            if !s.start_s.is_finite() || !s.end_s.is_finite() || s.start_s < 0.0 {
                return Err(bad("timestamps must be finite and non-negative"));
            }
            if s.start_s >= s.end_s {
                return Err(bad("start_s must be before end_s"));
            }
        }
        for (i, pair) in self.sentences.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.start_s < a.start_s {
                return Err(TranscriptError::NonMonotonicTimestamps {
                    position: i + 1,
                    regression_s: a.start_s - b.start_s,
                });
            }
            let overlap = a.end_s - b.start_s;
            if overlap > TIMESTAMP_JITTER_S + 1e-9 {
                return Err(TranscriptError::OverlappingSentences { index: i, next: i + 1, overlap_s: overlap });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// End of the last sentence.
    pub fn end_s(&self) -> f64 {
        self.sentences.iter().map(|s| s.end_s).fold(0.0, f64::max)
    }
}

/// Punctuation-based sentence splitter with an abbreviation allowlist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentencizer {
    pub abbreviations: Vec<String>,
}

impl Default for Sentencizer {
    fn default() -> Self {
        Self { abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect() }
    }
}

impl Sentencizer {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { abbreviations: abbreviations.into_iter().map(Into::into).collect() }
    }

    fn ends_sentence(&self, word: &str) -> bool {
        // closing quotes and brackets may follow the terminal mark
        let core = word.trim_end_matches(['"', '\'', ')', ']', '\u{201d}', '\u{2019}']);
        if !core.ends_with(['.', '!', '?']) {
            return false;
        }
        !self.abbreviations.iter().any(|a| a.eq_ignore_ascii_case(core))
    }

    /// Groups words into sentences; a boundary follows any word ending in
    /// `.`, `!` or `?` that is not an allowlisted abbreviation.
    pub fn sentencize(&self, words: &[Word]) -> Result<SentencizedTranscript> {
        if words.is_empty() {
            return Err(TranscriptError::EmptyTranscript);
        }
        for (i, w) in words.iter().enumerate() {
            w.check(i)?;
            if i > 0 {
                let prev = &words[i - 1];
                let regression = prev.start_s - w.start_s;
                if regression > TIMESTAMP_JITTER_S {
                    return Err(TranscriptError::NonMonotonicTimestamps { position: i, regression_s: regression });
                }
            }
        }

        let mut sentences = Vec::new();
        let mut run: Vec<&Word> = Vec::new();
        for w in words {
            run.push(w);
            if self.ends_sentence(&w.text) {
                sentences.push(close_run(sentences.len(), &run));
                run.clear();
            }
        }
        if !run.is_empty() {
            sentences.push(close_run(sentences.len(), &run));
        }
        // Jitter inside the tolerance can push a later sentence's start
        // slightly before an earlier one; clamp to keep starts ordered.
        for i in 1..sentences.len() {
            let floor = sentences[i - 1].start_s;
            if sentences[i].start_s < floor {
                sentences[i].start_s = floor;
                if sentences[i].end_s <= floor {
                    sentences[i].end_s = floor + MIN_SENTENCE_S;
                }
            }
        }
        SentencizedTranscript::new("", sentences)
    }
}

fn close_run(index: usize, run: &[&Word]) -> Sentence {
    let text = run.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
    let start_s = run[0].start_s;
    let mut end_s = run.iter().map(|w| w.end_s).fold(start_s, f64::max);
    if end_s - start_s < MIN_SENTENCE_S {
        end_s = start_s + MIN_SENTENCE_S;
    }
    Sentence { index, text, start_s, end_s }
}

/// Sentencizes with the default abbreviation allowlist.
pub fn sentencize(words: &[Word]) -> Result<SentencizedTranscript> {
    Sentencizer::default().sentencize(words)
}

/// Formats seconds as `SS.ss`: two decimals, half away from zero, integer
/// part padded to two digits.
pub fn format_timestamp(seconds: f64) -> String {
    let hundredths = (seconds * 100.0).round() as u64;
    format!("{:02}.{:02}", hundredths / 100, hundredths % 100)
}

pub fn render_line(sentence: &Sentence) -> String {
    format!("[{} - {}] {}", format_timestamp(sentence.start_s), format_timestamp(sentence.end_s), sentence.text)
}

pub fn render_timestamped(t: &SentencizedTranscript) -> String {
    t.sentences.iter().map(render_line).collect::<Vec<_>>().join("\n")
}

static LINE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\[(\d{2,}\.\d{2}) - (\d{2,}\.\d{2})\] (.+)$").expect("static regex"));

/// Parses the rendered line format back into a transcript with an empty
/// episode id. A single trailing newline is accepted.
pub fn parse_timestamped(s: &str) -> Result<SentencizedTranscript> {
    let body = s.strip_suffix('\n').unwrap_or(s);
    if body.is_empty() {
        return Err(TranscriptError::EmptyTranscript);
    }
    let mut sentences = Vec::new();
    for (i, raw) in body.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let malformed = || TranscriptError::MalformedLine { line: i + 1, text: line.to_string() };
        let caps = LINE_RE.captures(line).ok_or_else(malformed)?;
        let start_s: f64 = caps[1].parse().map_err(|_| malformed())?;
        let end_s: f64 = caps[2].parse().map_err(|_| malformed())?;
        sentences.push(Sentence { index: i, text: caps[3].to_string(), start_s, end_s });
    }
    SentencizedTranscript::new("", sentences)
}

/// Unit of work for both extraction systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub episode_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub show_name: String,
    #[serde(default)]
    pub language_tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<Word>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentences: Option<Vec<Sentence>>,
}

impl Episode {
    pub fn from_json(text: &str) -> Result<Self> {
        let ep: Episode = serde_json::from_str(text).map_err(|e| TranscriptError::Json(e.to_string()))?;
        ep.validate()?;
        Ok(ep)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| TranscriptError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("episode serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.episode_id.trim().is_empty() {
            return Err(TranscriptError::InvalidEpisode("episode_id is empty".into()));
        }
        let has_words = self.words.as_ref().is_some_and(|w| !w.is_empty());
        let has_sentences = self.sentences.as_ref().is_some_and(|s| !s.is_empty());
        if !has_words && !has_sentences {
            return Err(TranscriptError::InvalidEpisode("episode needs words or sentences".into()));
        }
        Ok(())
    }

    /// Sentence list for this episode: provided sentences win over words.
    pub fn transcript(&self, sentencizer: &Sentencizer) -> Result<SentencizedTranscript> {
        match (&self.sentences, &self.words) {
            (Some(s), _) if !s.is_empty() => SentencizedTranscript::new(self.episode_id.clone(), s.clone()),
            (_, Some(w)) if !w.is_empty() => Ok(sentencizer.sentencize(w)?.with_episode_id(self.episode_id.clone())),
            _ => Err(TranscriptError::EmptyTranscript),
        }
    }
}
