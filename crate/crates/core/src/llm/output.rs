//! Structured model output: the preview choice plus its metadata.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Descriptive metadata the model writes alongside its selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewMetadata {
    pub episode_theme: String,
    pub preview_title: String,
    pub preview_explanation: String,
    pub hashtags: Vec<String>,
}

/// The model's requested preview span. The end is advisory; the selector's
/// trim rule decides the final end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewChoice {
    pub preview_start_s: f64,
    pub preview_end_s: f64,
    #[serde(flatten)]
    pub metadata: PreviewMetadata,
}

impl PreviewChoice {
    /// Flat JSON object in the shape the prompt asks the model to emit.
    pub fn to_output_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("choice serializes")
    }
}

/// JSON shape given to the model inside the user prompt.
pub const DEFAULT_OUTPUT_SPEC: &str = r##"{
  "episode_theme": "<one-line theme of the whole episode>",
  "preview_title": "<short, catchy title for the preview>",
  "preview_explanation": "<one or two sentences on why this segment engages a new listener>",
  "hashtags": ["#TopicOne", "#TopicTwo", "#TopicThree"],
  "preview_start_s": <start timestamp of the first preview sentence, in seconds>,
  "preview_end_s": <end timestamp of the last preview sentence, in seconds>
}"##;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("no JSON object found in model output")]
    NoJsonFound,
    #[error("model output is not valid JSON: {0}")]
    InvalidJson(String),
    #[error("field `{field}`: {reason}")]
    SchemaViolation { field: &'static str, reason: String },
    #[error("invalid span: start {start_s} is not before end {end_s}")]
    InvalidSpan { start_s: f64, end_s: f64 },
}

/// Body of the first ``` fence, skipping an info string such as `json`.
fn first_fenced_block(text: &str) -> Option<&str> {
    let open = text.find("```")?;
    let after = &text[open + 3..];
    let body_start = after.find('\n').map(|i| i + 1)?;
    let body = &after[body_start..];
    let close = body.find("```").unwrap_or(body.len());
    Some(&body[..close])
}

fn json_candidate(region: &str) -> Result<Value, ParseError> {
    let trimmed = region.trim();
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        return Ok(v);
    }
    let open = trimmed.find('{').ok_or(ParseError::NoJsonFound)?;
    let close = trimmed.rfind('}').ok_or(ParseError::NoJsonFound)?;
    if close < open {
        return Err(ParseError::NoJsonFound);
    }
    serde_json::from_str(&trimmed[open..=close]).map_err(|e| ParseError::InvalidJson(e.to_string()))
}

fn field<'a>(obj: &'a Map<String, Value>, name: &'static str) -> Result<&'a Value, ParseError> {
    obj.get(name).ok_or(ParseError::SchemaViolation { field: name, reason: "missing".into() })
}

fn number(obj: &Map<String, Value>, name: &'static str) -> Result<f64, ParseError> {
    let v = field(obj, name)?;
    let n = v.as_f64().ok_or_else(|| ParseError::SchemaViolation {
        field: name,
        reason: format!("expected a number, got {}", type_name(v)),
    })?;
    if !n.is_finite() || n < 0.0 {
        return Err(ParseError::SchemaViolation {
            field: name,
            reason: format!("expected a finite non-negative number, got {n}"),
        });
    }
    Ok(n)
}

fn string(obj: &Map<String, Value>, name: &'static str) -> Result<String, ParseError> {
    let v = field(obj, name)?;
    v.as_str().map(str::to_string).ok_or_else(|| ParseError::SchemaViolation {
        field: name,
        reason: format!("expected a string, got {}", type_name(v)),
    })
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Strips whitespace and guarantees a single leading `#`. Tags with nothing
/// left after the `#` are dropped.
pub fn normalize_hashtag(raw: &str) -> Option<String> {
    let compact: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    let body = compact.trim_start_matches('#');
    if body.is_empty() {
        None
    } else {
        Some(format!("#{body}"))
    }
}

/// Extracts the first fenced block (or the whole text), then reads and checks
/// every preview field.
pub fn parse_llm_output(text: &str) -> Result<PreviewChoice, ParseError> {
    let region = first_fenced_block(text).unwrap_or(text);
    let value = json_candidate(region)?;
    let obj = value.as_object().ok_or_else(|| ParseError::SchemaViolation {
        field: "<root>",
        reason: format!("expected an object, got {}", type_name(&value)),
    })?;

    let preview_start_s = number(obj, "preview_start_s")?;
    let preview_end_s = number(obj, "preview_end_s")?;
    let episode_theme = string(obj, "episode_theme")?;
    let preview_title = string(obj, "preview_title")?;
    if preview_title.trim().is_empty() {
        return Err(ParseError::SchemaViolation { field: "preview_title", reason: "must not be empty".into() });
    }
    let preview_explanation = string(obj, "preview_explanation")?;
    let tags = field(obj, "hashtags")?;
    let tags = tags.as_array().ok_or_else(|| ParseError::SchemaViolation {
        field: "hashtags",
        reason: format!("expected an array, got {}", type_name(tags)),
    })?;
    let mut hashtags = Vec::with_capacity(tags.len());
    for t in tags {
        let s = t.as_str().ok_or_else(|| ParseError::SchemaViolation {
            field: "hashtags",
            reason: format!("expected strings, got {}", type_name(t)),
        })?;
        hashtags.extend(normalize_hashtag(s));
    }

    if preview_start_s >= preview_end_s {
        return Err(ParseError::InvalidSpan { start_s: preview_start_s, end_s: preview_end_s });
    }
    Ok(PreviewChoice {
        preview_start_s,
        preview_end_s,
        metadata: PreviewMetadata { episode_theme, preview_title, preview_explanation, hashtags },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const REALITY: &str = r##"Here is my reasoning, then the answer.

```json
{"preview_start_s": 120.5, "preview_end_s": 181.0,
 "episode_theme": "Unlocking Lucid Dreaming: Methods, Science, and Benefits",
 "preview_title": "Does Reality Testing Work?",
 "preview_explanation": "...",
 "hashtags": ["#LucidDreamingHacks","#RealityTestingDreams","#DreamScience"]}
```
Hope this helps."##;

    #[test]
    fn parses_fenced_metadata() {
        let c = parse_llm_output(REALITY).unwrap();
        assert_eq!(c.preview_start_s, 120.5);
        assert_eq!(c.preview_end_s, 181.0);
        assert_eq!(c.metadata.episode_theme, "Unlocking Lucid Dreaming: Methods, Science, and Benefits");
        assert_eq!(c.metadata.preview_title, "Does Reality Testing Work?");
        assert_eq!(c.metadata.preview_explanation, "...");
        assert_eq!(c.metadata.hashtags, vec!["#LucidDreamingHacks", "#RealityTestingDreams", "#DreamScience"]);
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse_llm_output("no braces at all"), Err(ParseError::NoJsonFound));
        assert_eq!(parse_llm_output(""), Err(ParseError::NoJsonFound));
        let swapped = REALITY.replace("120.5", "200").replace("181.0", "100");
        assert_eq!(parse_llm_output(&swapped), Err(ParseError::InvalidSpan { start_s: 200.0, end_s: 100.0 }));
        let missing = REALITY.replace("\"preview_title\": \"Does Reality Testing Work?\",", "");
        assert!(matches!(parse_llm_output(&missing), Err(ParseError::SchemaViolation { field: "preview_title", .. })));
        let typed = REALITY.replace("120.5", "\"120.5\"");
        assert!(matches!(parse_llm_output(&typed), Err(ParseError::SchemaViolation { field: "preview_start_s", .. })));
        assert!(matches!(parse_llm_output("{\"a\": }"), Err(ParseError::InvalidJson(_))));
        assert!(matches!(parse_llm_output("[1, 2]"), Err(ParseError::SchemaViolation { field: "<root>", .. })));
    }

    #[test]
    fn unfenced_with_prose_and_hashtag_normalization() {
        let text = r###"Sure! {"preview_start_s": 1, "preview_end_s": 2, "episode_theme": "t",
            "preview_title": "x", "preview_explanation": "", "hashtags": ["Dream Science", " #a b", "#", "##two"]} done"###;
        let c = parse_llm_output(text).unwrap();
        assert_eq!(c.metadata.hashtags, vec!["#DreamScience", "#ab", "#two"]);
    }

    fn tag() -> impl Strategy<Value = String> {
        "[A-Za-z0-9]{1,12}".prop_map(|s| format!("#{s}"))
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(
            start in 0.0f64..10_000.0,
            len in 0.01f64..600.0,
            theme in "[^\u{0}-\u{1f}]{0,40}",
            title in "[A-Za-z][^\u{0}-\u{1f}]{0,40}",
            expl in "[^\u{0}-\u{1f}]{0,80}",
            tags in prop::collection::vec(tag(), 0..5),
        ) {
            let end = start + len;
            prop_assume!(start < end);
            let choice = PreviewChoice {
                preview_start_s: start,
                preview_end_s: end,
                metadata: PreviewMetadata {
                    episode_theme: theme,
                    preview_title: title,
                    preview_explanation: expl,
                    hashtags: tags,
                },
            };
            let fenced = format!("```json\n{}\n```", choice.to_output_json());
            prop_assert_eq!(parse_llm_output(&fenced).unwrap(), choice.clone());
            prop_assert_eq!(parse_llm_output(&choice.to_output_json()).unwrap(), choice);
        }

        #[test]
        fn total_on_arbitrary_text(s in "\\PC{0,200}") {
            if let Ok(c) = parse_llm_output(&s) {
                prop_assert!(c.preview_start_s < c.preview_end_s);
            }
        }
    }
}
