use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{BaselineConfig, LexiconScorer, DEFAULT_AD_CUES};
use crate::gate::GateConfig;
use crate::llm::{BudgetGuard, HttpClientConfig, RetryPolicy, DEFAULT_MAX_IN_FLIGHT, DEFAULT_TEMPERATURE};
use crate::promptkit::PromptConfig;
use crate::selector::SelectorConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("reading {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("parsing {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClientSettings {
    pub http: HttpClientConfig,
    pub retry: RetryPolicy,
    /// Cap on concurrent upstream completions across all workers.
    pub max_in_flight: usize,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub budget: BudgetGuard,
}

impl Default for ClientSettings {
    fn default() -> Self {
        Self {
            http: HttpClientConfig::default(),
            retry: RetryPolicy::default(),
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            temperature: DEFAULT_TEMPERATURE,
            max_output_tokens: 1024,
            budget: BudgetGuard::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdCueSettings {
    pub cues: Vec<String>,
    pub confidence: f64,
}

impl Default for AdCueSettings {
    fn default() -> Self {
        Self { cues: DEFAULT_AD_CUES.iter().map(|c| c.to_string()).collect(), confidence: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkerSettings {
    pub concurrency: usize,
}

impl Default for WorkerSettings {
    fn default() -> Self {
        Self { concurrency: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoreSettings {
    pub path: PathBuf,
}

impl Default for StoreSettings {
    fn default() -> Self {
        Self { path: PathBuf::from("previews.jsonl") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceSettings {
    pub bind: String,
    /// When set, every endpoint except /healthz requires `Authorization: Bearer <token>`.
    pub bearer_token: Option<String>,
}

impl Default for ServiceSettings {
    fn default() -> Self {
        Self { bind: "127.0.0.1:8080".into(), bearer_token: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub gate: GateConfig,
    /// Prompt config file; replaces `prompt` when set. Relative paths resolve
    /// against the config file's directory.
    pub prompt_path: Option<PathBuf>,
    pub prompt: PromptConfig,
    pub client: ClientSettings,
    pub selector: SelectorConfig,
    pub baseline: BaselineConfig,
    pub ad_cues: AdCueSettings,
    pub lexicon: LexiconScorer,
    pub worker: WorkerSettings,
    pub store: StoreSettings,
    pub service: ServiceSettings,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: "<toml>".into(), reason: e.to_string() })
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse { path: "<json>".into(), reason: e.to_string() })
    }

    /// Loads TOML for `.toml` files and JSON otherwise, then resolves
    /// `prompt_path` and validates.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: shown.clone(), reason: e.to_string() })?;
        let parsed = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        let mut config: Self = parsed.map_err(|reason| ConfigError::Parse { path: shown, reason })?;
        if let Some(p) = config.prompt_path.take() {
            let p = if p.is_relative() { path.parent().unwrap_or(Path::new(".")).join(p) } else { p };
            config.prompt = PromptConfig::from_path(&p)
                .map_err(|e| ConfigError::Parse { path: p.display().to_string(), reason: e.to_string() })?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(0.0..=1.0).contains(&self.gate.detector_threshold) {
            return bad(format!("gate.detector_threshold {} outside [0, 1]", self.gate.detector_threshold));
        }
        if self.worker.concurrency == 0 {
            return bad("worker.concurrency must be at least 1".into());
        }
        if self.client.max_in_flight == 0 {
            return bad("client.max_in_flight must be at least 1".into());
        }
        if self.client.retry.max_attempts == 0 {
            return bad("client.retry.max_attempts must be at least 1".into());
        }
        if !(self.selector.window_s > 0.0) {
            return bad(format!("selector.window_s must be > 0, got {}", self.selector.window_s));
        }
        if !(self.baseline.window_s > 0.0) || !(self.baseline.resolution_s > 0.0) {
            return bad("baseline.window_s and baseline.resolution_s must be > 0".into());
        }
        self.baseline.weights.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.baseline.adjustments.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let toml_text = r#"
            [gate]
            detector_threshold = 0.9

            [selector]
            window_s = 45.0

            [worker]
            concurrency = 3

            [store]
            path = "out/store.jsonl"

            [client.http]
            endpoint = "http://localhost:9/complete"
            credential_env = "MY_KEY"

            [baseline.weights]
            ad_overlap = 4.0
        "#;
        let a = PipelineConfig::from_toml(toml_text).unwrap();
        assert_eq!(a.gate.detector_threshold, 0.9);
        assert_eq!(a.selector.window_s, 45.0);
        assert_eq!(a.worker.concurrency, 3);
        assert_eq!(a.client.http.credential_env.as_deref(), Some("MY_KEY"));
        assert_eq!(a.baseline.weights.ad_overlap, 4.0);
        assert_eq!(a.baseline.weights.selectivity, 1.0);
        assert_eq!(a.client.max_in_flight, 8);

        let b = PipelineConfig::from_json(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prompt_path_resolves_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("prompt.json"), r#"{"task_description": "Pick a clip."}"#).unwrap();
        let cfg = dir.path().join("pipeline.toml");
        std::fs::write(&cfg, "prompt_path = \"prompt.json\"\n").unwrap();
        let c = PipelineConfig::from_path(&cfg).unwrap();
        assert_eq!(c.prompt.task_description, "Pick a clip.");
        assert!(c.prompt_path.is_none());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = PipelineConfig::default();
        c.validate().unwrap();
        c.worker.concurrency = 0;
        assert!(c.validate().is_err());
        let c = PipelineConfig::from_toml("[gate]\ndetector_threshold = 2.0").unwrap();
        assert!(c.validate().is_err());
        assert!(matches!(PipelineConfig::from_path("/nonexistent.toml"), Err(ConfigError::Io { .. })));
    }
}
