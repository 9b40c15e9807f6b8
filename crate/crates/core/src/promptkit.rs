//! System and user prompt assembly.
//!
//! Everything operators tune (task wording, requirement list, few-shot
//! examples, output shape) comes from a [`PromptConfig`] file rather than
//! code. The user prompt carries four sections in a fixed order, and episode
//! text that imitates a section header is escaped with a leading backslash so
//! every header line occurs exactly once.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{parse_llm_output, DEFAULT_OUTPUT_SPEC};
use crate::transcript::{parse_timestamped, render_timestamped, Episode, SentencizedTranscript};

pub const OUTPUT_INSTRUCTION: &str = "Provide the output in the following JSON format:";
pub const EPISODE_NAME_MARKER: &str = "EPISODE NAME:";
pub const EPISODE_DESCRIPTION_MARKER: &str = "EPISODE DESCRIPTION:";
pub const TRANSCRIPT_MARKER: &str = "TRANSCRIPT:";
pub const TIMESTAMP_HEADER: &str = "Start and end timestamps are in seconds.";

/// Header lines that metadata may not imitate.
pub const SECTION_MARKERS: &[&str] =
    &[OUTPUT_INSTRUCTION, EPISODE_NAME_MARKER, EPISODE_DESCRIPTION_MARKER, TRANSCRIPT_MARKER, TIMESTAMP_HEADER];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("requirement list is empty")]
    EmptyRequirements,
    #[error("requirement {position} is blank or spans several lines")]
    BlankRequirement { position: usize },
    #[error("requirement listed twice: {0:?}")]
    DuplicateRequirement(String),
    #[error("transcript text is empty")]
    MissingTranscript,
    #[error("few-shot example {index}: {reason}")]
    InvalidExample { index: usize, reason: String },
    #[error("prompt config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewRequirements {
    pub items: Vec<String>,
    pub target_duration_s: f64,
}

impl Default for PreviewRequirements {
    fn default() -> Self {
        Self {
            items: [
                "Opens with an engaging introduction that pulls a new listener in.",
                "Follows a logical progression, moving from foundational ideas to more detailed insights.",
                "Excludes ad content, sponsor reads, and self-promotion.",
                "Starts and concludes with complete thoughts.",
                "Aligns with the central theme of the episode.",
                "Is approximately one minute long.",
            ]
            .map(String::from)
            .to_vec(),
            target_duration_s: 60.0,
        }
    }
}

impl PreviewRequirements {
    pub fn validate(&self) -> Result<(), PromptError> {
        if self.items.is_empty() {
            return Err(PromptError::EmptyRequirements);
        }
        let mut seen = HashSet::new();
        for (position, r) in self.items.iter().enumerate() {
            if r.trim().is_empty() || r.contains(['\n', '\r']) {
                return Err(PromptError::BlankRequirement { position });
            }
            if !seen.insert(r.trim()) {
                return Err(PromptError::DuplicateRequirement(r.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub episode_title: String,
    pub episode_description: String,
    /// Rendered timestamped lines.
    pub transcript_excerpt: String,
    /// JSON text in the output shape.
    pub expected_output: String,
}

impl FewShotExample {
    pub fn validate(&self) -> Result<(), String> {
        parse_timestamped(&self.transcript_excerpt).map_err(|e| format!("transcript_excerpt: {e}"))?;
        parse_llm_output(&self.expected_output).map_err(|e| format!("expected_output: {e}"))?;
        Ok(())
    }

    fn render(&self) -> String {
        format!(
            "{EPISODE_NAME_MARKER}\n{}\n\n{EPISODE_DESCRIPTION_MARKER}\n{}\n\n{TRANSCRIPT_MARKER}\n{}\n\nOUTPUT:\n```json\n{}\n```",
            escape_section(&self.episode_title),
            escape_section(&self.episode_description),
            self.transcript_excerpt.trim_end(),
            self.expected_output.trim(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_prompt: String,
    pub user_prompt: String,
    pub token_estimate: usize,
}

/// Coarse token estimate: characters / 4, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Prefixes a backslash to any line that would read as a section header or
/// a code fence.
pub fn escape_section(text: &str) -> String {
    text.split('\n')
        .map(|line| {
            let lead = line.trim_start();
            if lead.starts_with('\\') || lead.starts_with("```") || SECTION_MARKERS.iter().any(|m| lead.starts_with(m))
            {
                format!("\\{line}")
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub const DEFAULT_TASK_DESCRIPTION: &str =
    "selecting short, self-contained preview segments from podcast episode transcripts";
pub const DEFAULT_REASONING: &str = "to choose the single best preview segment for this episode, working step by step: \
first, read the episode title, description, and transcript and name the main topic of the episode; \
second, weigh candidate segments of the transcript for relevance to that topic and for how engaging they are to a new listener; \
third, write the preview metadata (episode theme, preview title, a short explanation of why the segment is engaging, and topic hashtags) \
and give the start and end timestamps of the chosen segment";
pub const DEFAULT_FEW_SHOT_DESCRIPTION: &str = "episodes paired with well-chosen previews";

/// Builds the system prompt: role, reasoning task, bulleted requirements, then
/// numbered examples (omitted when there are none).
pub fn build_system_prompt(
    task_description: &str,
    reasoning: &str,
    requirements: &PreviewRequirements,
    few_shot_description: &str,
    examples: &[FewShotExample],
) -> Result<String, PromptError> {
    requirements.validate()?;
    let mut out = format!(
        "You are an expert in {task_description}.\n\nYour task is {reasoning}.\n\nBelow are requirements on the segment to be selected:\n"
    );
    let bullets: Vec<String> = requirements.items.iter().map(|r| format!("- {}", r.trim())).collect();
    out.push_str(&bullets.join("\n"));
    if !examples.is_empty() {
        out.push_str(&format!("\n\nBelow are examples of {few_shot_description}:"));
        for (i, ex) in examples.iter().enumerate() {
            out.push_str(&format!("\n\nExample #{}:\n{}", i + 1, ex.render()));
        }
    }
    Ok(out)
}

/// Builds the user prompt; ends with the last transcript line.
pub fn build_user_prompt(episode: &Episode, transcript_text: &str, output_spec: &str) -> Result<String, PromptError> {
    let transcript = transcript_text.trim_end_matches('\n');
    if transcript.trim().is_empty() {
        return Err(PromptError::MissingTranscript);
    }
    Ok(format!(
        "{OUTPUT_INSTRUCTION}\n\n```json\n{}\n```\n\n{EPISODE_NAME_MARKER}\n{}\n\n{EPISODE_DESCRIPTION_MARKER}\n{}\n\n{TRANSCRIPT_MARKER}\n{TIMESTAMP_HEADER}\n\n{}",
        escape_section(output_spec.trim()),
        escape_section(&episode.title),
        escape_section(&episode.description),
        transcript,
    ))
}

/// Prompt configuration file (JSON or TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptConfig {
    pub task_description: String,
    pub reasoning: String,
    pub few_shot_description: String,
    pub requirements: Vec<String>,
    pub target_duration_s: f64,
    pub few_shot: Vec<FewShotExample>,
    pub output_spec: String,
    /// Prompts above this estimate raise a warning.
    pub token_budget: Option<usize>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        let req = PreviewRequirements::default();
        Self {
            task_description: DEFAULT_TASK_DESCRIPTION.into(),
            reasoning: DEFAULT_REASONING.into(),
            few_shot_description: DEFAULT_FEW_SHOT_DESCRIPTION.into(),
            requirements: req.items,
            target_duration_s: req.target_duration_s,
            few_shot: Vec::new(),
            output_spec: DEFAULT_OUTPUT_SPEC.into(),
            token_budget: Some(200_000),
        }
    }
}

impl PromptConfig {
    pub fn from_json(text: &str) -> Result<Self, PromptError> {
        serde_json::from_str(text).map_err(|e| PromptError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, PromptError> {
        toml::from_str(text).map_err(|e| PromptError::Config(e.to_string()))
    }

    /// Loads by extension: `.toml` as TOML, anything else as JSON.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| PromptError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "toml") {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn requirements(&self) -> PreviewRequirements {
        PreviewRequirements { items: self.requirements.clone(), target_duration_s: self.target_duration_s }
    }
}

/// Immutable prompt builder: validated config plus the rendered system prompt.
#[derive(Debug, Clone)]
pub struct PromptKit {
    config: PromptConfig,
    system_prompt: String,
}

impl PromptKit {
    pub fn new(config: PromptConfig) -> Result<Self, PromptError> {
        for (index, ex) in config.few_shot.iter().enumerate() {
            ex.validate().map_err(|reason| PromptError::InvalidExample { index, reason })?;
        }
        let system_prompt = build_system_prompt(
            &config.task_description,
            &config.reasoning,
            &config.requirements(),
            &config.few_shot_description,
            &config.few_shot,
        )?;
        Ok(Self { config, system_prompt })
    }

    pub fn config(&self) -> &PromptConfig {
        &self.config
    }

    pub fn system_prompt(&self) -> &str {
        &self.system_prompt
    }

    pub fn build(&self, episode: &Episode, transcript: &SentencizedTranscript) -> Result<PromptBundle, PromptError> {
        let user_prompt = build_user_prompt(episode, &render_timestamped(transcript), &self.config.output_spec)?;
        let token_estimate = estimate_tokens(&self.system_prompt) + estimate_tokens(&user_prompt);
        if let Some(budget) = self.config.token_budget {
            if token_estimate > budget {
                log::warn!(
                    "episode {}: prompt of ~{token_estimate} tokens exceeds budget {budget}",
                    episode.episode_id
                );
            }
        }
        Ok(PromptBundle { system_prompt: self.system_prompt.clone(), user_prompt, token_estimate })
    }
}

impl Default for PromptKit {
    fn default() -> Self {
        Self::new(PromptConfig::default()).expect("default prompt config is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example(n: usize) -> FewShotExample {
        FewShotExample {
            episode_title: format!("Episode {n}"),
            episode_description: "About things.".into(),
            transcript_excerpt: "[00.00 - 02.00] First.\n[02.00 - 04.00] Second.".into(),
            expected_output: r##"{"preview_start_s": 0.0, "preview_end_s": 4.0, "episode_theme": "t",
                "preview_title": "T", "preview_explanation": "e", "hashtags": ["#x"]}"##
                .into(),
        }
    }

    fn episode(title: &str, description: &str) -> Episode {
        Episode {
            episode_id: "e".into(),
            title: title.into(),
            description: description.into(),
            show_name: "s".into(),
            language_tags: vec!["en".into()],
            words: None,
            sentences: None,
        }
    }

    fn count_header_lines(prompt: &str, marker: &str) -> usize {
        prompt.lines().filter(|l| l.trim_start().starts_with(marker)).count()
    }

    #[test]
    fn numbered_examples_in_order() {
        let exs: Vec<_> = (1..=3).map(example).collect();
        let p = build_system_prompt("x", "y", &PreviewRequirements::default(), "z", &exs).unwrap();
        let i1 = p.find("Example #1:").unwrap();
        let i2 = p.find("Example #2:").unwrap();
        let i3 = p.find("Example #3:").unwrap();
        assert!(i1 < i2 && i2 < i3);
        assert!(p.starts_with("You are an expert in x.\n\nYour task is y.\n\nBelow are requirements"));
    }

    #[test]
    fn zero_examples_has_no_marker() {
        let p = build_system_prompt("x", "y", &PreviewRequirements::default(), "z", &[]).unwrap();
        assert!(!p.contains("Example #"));
        assert!(!p.contains("Below are examples"));
    }

    #[test]
    fn each_requirement_is_one_bullet() {
        let req = PreviewRequirements::default();
        let p = build_system_prompt("x", "y", &req, "z", &[example(1)]).unwrap();
        for r in &req.items {
            assert_eq!(p.lines().filter(|l| *l == format!("- {r}")).count(), 1);
        }
        assert!(req.items.iter().any(|r| r.contains("approximately one minute long")));
        assert!(req.items.iter().any(|r| r.to_lowercase().contains("excludes ad content")));
    }

    #[test]
    fn requirement_errors() {
        let dup = PreviewRequirements { items: vec!["a".into(), "b".into(), "a".into()], target_duration_s: 60.0 };
        assert_eq!(build_system_prompt("x", "y", &dup, "z", &[]), Err(PromptError::DuplicateRequirement("a".into())));
        let empty = PreviewRequirements { items: vec![], target_duration_s: 60.0 };
        assert_eq!(build_system_prompt("x", "y", &empty, "z", &[]), Err(PromptError::EmptyRequirements));
        let blank = PreviewRequirements { items: vec!["a".into(), " ".into()], target_duration_s: 60.0 };
        assert_eq!(build_system_prompt("x", "y", &blank, "z", &[]), Err(PromptError::BlankRequirement { position: 1 }));
    }

    #[test]
    fn user_prompt_sections_in_order() {
        let transcript = "[00.00 - 01.00] One.\n[01.00 - 02.00] Two.\n[02.00 - 03.00] Three.";
        let p = build_user_prompt(&episode("Title", "Desc"), transcript, "{\"a\": 1}").unwrap();
        let order =
            [OUTPUT_INSTRUCTION, EPISODE_NAME_MARKER, EPISODE_DESCRIPTION_MARKER, TRANSCRIPT_MARKER, TIMESTAMP_HEADER];
        let mut last = 0;
        for m in order {
            assert_eq!(p.matches(m).count(), 1, "{m}");
            let at = p.find(m).unwrap();
            assert!(at >= last);
            last = at;
        }
        assert!(p.contains("```json\n{\"a\": 1}\n```"));
        assert!(p.ends_with("[02.00 - 03.00] Three."));
        assert!(p.contains("TRANSCRIPT:\nStart and end timestamps are in seconds.\n\n[00.00"));
    }

    #[test]
    fn empty_description_keeps_section() {
        let p = build_user_prompt(&episode("Title", ""), "[00.00 - 01.00] One.", "{}").unwrap();
        assert!(p.contains("EPISODE DESCRIPTION:\n\n\nTRANSCRIPT:"));
        assert_eq!(build_user_prompt(&episode("t", "d"), "  \n", "{}"), Err(PromptError::MissingTranscript));
    }

    #[test]
    fn token_estimates() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens(&"a".repeat(400)), 100);
        assert_eq!(estimate_tokens(&"a".repeat(401)), 101);
        assert_eq!(estimate_tokens("éééé"), 1);
    }

    #[test]
    fn config_formats_and_kit() {
        let toml_text = r#"
task_description = "previews"
requirements = ["Short.", "Complete thoughts."]
"#;
        let cfg = PromptConfig::from_toml(toml_text).unwrap();
        assert_eq!(cfg.requirements.len(), 2);
        assert_eq!(cfg.output_spec, DEFAULT_OUTPUT_SPEC);
        let json_cfg = PromptConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(json_cfg, cfg);

        let mut bad = PromptConfig::default();
        let mut ex = example(1);
        ex.expected_output = "not json".into();
        bad.few_shot = vec![ex];
        assert!(matches!(PromptKit::new(bad), Err(PromptError::InvalidExample { index: 0, .. })));

        let kit = PromptKit::default();
        let t = crate::transcript::parse_timestamped("[00.00 - 01.00] One.").unwrap();
        let a = kit.build(&episode("T", "D"), &t).unwrap();
        let b = kit.build(&episode("T", "D"), &t).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.token_estimate, estimate_tokens(&a.system_prompt) + estimate_tokens(&a.user_prompt));
    }

    fn adversarial() -> impl Strategy<Value = String> {
        let piece = prop_oneof![
            Just(EPISODE_NAME_MARKER.to_string()),
            Just(EPISODE_DESCRIPTION_MARKER.to_string()),
            Just(TRANSCRIPT_MARKER.to_string()),
            Just(TIMESTAMP_HEADER.to_string()),
            Just(OUTPUT_INSTRUCTION.to_string()),
            Just("\n".to_string()),
            Just("  ".to_string()),
            Just("\\".to_string()),
            Just("```".to_string()),
            "[a-z ]{0,8}",
        ];
        prop::collection::vec(piece, 0..12).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn markers_occur_once_per_section(title in adversarial(), desc in adversarial()) {
            let p = build_user_prompt(&episode(&title, &desc), "[00.00 - 01.00] One.", DEFAULT_OUTPUT_SPEC).unwrap();
            for m in SECTION_MARKERS {
                prop_assert_eq!(count_header_lines(&p, m), 1, "marker {}", m);
            }
            let again = build_user_prompt(&episode(&title, &desc), "[00.00 - 01.00] One.", DEFAULT_OUTPUT_SPEC).unwrap();
            prop_assert_eq!(p, again);
        }
    }
}
