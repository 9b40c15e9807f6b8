//! Deterministic scripted completion client.
//!
//! Script files are a JSON array (or `{"responses": [...]}`) of entries:
//!
//! ```json
//! [
//!   {"fail": "transient", "message": "503"},
//!   {"output": {"preview_start_s": 120.5, "...": "..."}, "latency_s": 0.01},
//!   {"text": "raw model text"}
//! ]
//! ```
//!
//! `output` objects are rendered as a fenced json block.

use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::client::{ClientError, CompletionClient, CompletionRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailKind {
    Transient,
    Auth,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedResponse {
    Text {
        text: String,
        #[serde(default)]
        latency_s: f64,
    },
    Output {
        output: Value,
        #[serde(default)]
        latency_s: f64,
    },
    Fail {
        fail: FailKind,
        #[serde(default)]
        message: String,
        #[serde(default)]
        latency_s: f64,
    },
}

impl ScriptedResponse {
    pub fn ok(text: impl Into<String>) -> Self {
        Self::Text { text: text.into(), latency_s: 0.0 }
    }

    pub fn transient(message: impl Into<String>) -> Self {
        Self::Fail { fail: FailKind::Transient, message: message.into(), latency_s: 0.0 }
    }

    pub fn auth(message: impl Into<String>) -> Self {
        Self::Fail { fail: FailKind::Auth, message: message.into(), latency_s: 0.0 }
    }

    pub fn rejected(message: impl Into<String>) -> Self {
        Self::Fail { fail: FailKind::Rejected, message: message.into(), latency_s: 0.0 }
    }

    pub fn with_latency(mut self, seconds: f64) -> Self {
        match &mut self {
            Self::Text { latency_s, .. } | Self::Output { latency_s, .. } | Self::Fail { latency_s, .. } => {
                *latency_s = seconds
            }
        }
        self
    }

    fn latency_s(&self) -> f64 {
        match self {
            Self::Text { latency_s, .. } | Self::Output { latency_s, .. } | Self::Fail { latency_s, .. } => *latency_s,
        }
    }

    fn resolve(&self) -> Result<String, ClientError> {
        match self {
            Self::Text { text, .. } => Ok(text.clone()),
            Self::Output { output, .. } => {
                Ok(format!("```json\n{}\n```", serde_json::to_string_pretty(output).expect("value serializes")))
            }
            Self::Fail { fail, message, .. } => Err(match fail {
                FailKind::Transient => ClientError::Transient(message.clone()),
                FailKind::Auth => ClientError::Auth(message.clone()),
                FailKind::Rejected => ClientError::Rejected(message.clone()),
            }),
        }
    }
}

#[derive(Debug)]
pub struct MockClient {
    script: Vec<ScriptedResponse>,
    cursor: Mutex<usize>,
}

/// Replays `script` in order, repeating the last entry once exhausted.
///
/// # Panics
/// If `script` is empty.
pub fn mock_client(script: Vec<ScriptedResponse>) -> MockClient {
    assert!(!script.is_empty(), "mock script must not be empty");
    MockClient { script, cursor: Mutex::new(0) }
}

impl MockClient {
    pub fn from_json(text: &str) -> Result<Self, String> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum File {
            List(Vec<ScriptedResponse>),
            Wrapped { responses: Vec<ScriptedResponse> },
        }
        let script = match serde_json::from_str::<File>(text).map_err(|e| e.to_string())? {
            File::List(s) | File::Wrapped { responses: s } => s,
        };
        if script.is_empty() {
            return Err("mock script is empty".into());
        }
        Ok(mock_client(script))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    /// Number of calls served so far.
    pub fn calls(&self) -> usize {
        *self.cursor.lock().expect("mock lock")
    }
}

impl CompletionClient for MockClient {
    fn call(&self, _req: &CompletionRequest) -> Result<String, ClientError> {
        let entry = {
            let mut cursor = self.cursor.lock().expect("mock lock");
            let i = (*cursor).min(self.script.len() - 1);
            *cursor += 1;
            self.script[i].clone()
        };
        let latency = entry.latency_s();
        if latency > 0.0 {
            std::thread::sleep(Duration::from_secs_f64(latency));
        }
        entry.resolve()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    fn req() -> CompletionRequest {
        CompletionRequest::new("s", "u")
    }

    #[test]
    fn single_entry_repeats() {
        let m = mock_client(vec![ScriptedResponse::ok("a")]);
        for _ in 0..3 {
            assert_eq!(m.call(&req()).unwrap(), "a");
        }
        assert_eq!(m.calls(), 3);
    }

    #[test]
    fn fail_then_succeed() {
        let m = mock_client(vec![ScriptedResponse::transient("x"), ScriptedResponse::ok("b")]);
        assert!(m.call(&req()).is_err());
        assert_eq!(m.call(&req()).unwrap(), "b");
        assert_eq!(m.call(&req()).unwrap(), "b");
    }

    #[test]
    fn latency_is_injected() {
        let m = mock_client(vec![ScriptedResponse::ok("a").with_latency(0.01)]);
        let t = Instant::now();
        m.call(&req()).unwrap();
        assert!(t.elapsed().as_secs_f64() >= 0.01);
    }

    #[test]
    fn loads_script_files() {
        let m =
            MockClient::from_json(r#"[{"fail":"auth","message":"no"},{"output":{"a":1}},{"text":"t","latency_s":0}]"#)
                .unwrap();
        assert_eq!(m.call(&req()), Err(ClientError::Auth("no".into())));
        assert_eq!(m.call(&req()).unwrap(), "```json\n{\n  \"a\": 1\n}\n```");
        assert_eq!(m.call(&req()).unwrap(), "t");
        assert!(MockClient::from_json(r#"{"responses":[{"text":"x"}]}"#).is_ok());
        assert!(MockClient::from_json("[]").is_err());
    }
}
