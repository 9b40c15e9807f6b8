//! Generic JSON chat-completion client over HTTP.
//!
//! Sends `{"model", "system", "user", "temperature", "max_output_tokens"}` and
//! reads the generated text at a JSON pointer in the response (default
//! `/text`). Vendor differences live in `response_pointer`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::client::{ClientError, CompletionClient, CompletionRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpClientConfig {
    pub endpoint: String,
    pub model: Option<String>,
    /// Environment variable holding the bearer credential.
    pub credential_env: Option<String>,
    pub response_pointer: String,
    pub timeout_s: f64,
}

impl Default for HttpClientConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/complete".into(),
            model: None,
            credential_env: Some("PODPREVIEW_API_KEY".into()),
            response_pointer: "/text".into(),
            timeout_s: 120.0,
        }
    }
}

pub struct HttpClient {
    config: HttpClientConfig,
    credential: Option<String>,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    /// Reads the credential from the configured environment variable; a
    /// configured but unset variable is an auth error.
    pub fn new(config: HttpClientConfig) -> Result<Self, ClientError> {
        let credential = match &config.credential_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| ClientError::Auth(format!("credential variable {var} is not set")))?,
            ),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_s.max(0.001)))
            .build()
            .map_err(|e| ClientError::Rejected(format!("building HTTP client: {e}")))?;
        Ok(Self { config, credential, http })
    }
}

impl CompletionClient for HttpClient {
    fn call(&self, req: &CompletionRequest) -> Result<String, ClientError> {
        let body = json!({
            "model": self.config.model,
            "system": req.system,
            "user": req.user,
            "temperature": req.temperature,
            "max_output_tokens": req.max_output_tokens,
        });
        let mut builder = self.http.post(&self.config.endpoint).json(&body);
        if let Some(token) = &self.credential {
            builder = builder.bearer_auth(token);
        }
        let resp = builder.send().map_err(|e| {
            if e.is_timeout() || e.is_connect() || e.is_request() {
                ClientError::Transient(e.to_string())
            } else {
                ClientError::Rejected(e.to_string())
            }
        })?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| ClientError::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(ClientError::from_status(status, &text));
        }
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| ClientError::Rejected(format!("response is not JSON: {e}")))?;
        value
            .pointer(&self.config.response_pointer)
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| ClientError::Rejected(format!("response has no string at {}", self.config.response_pointer)))
    }
}
