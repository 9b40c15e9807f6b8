use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::promptkit::estimate_tokens;

pub const DEFAULT_TEMPERATURE: f64 = 0.2;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl CompletionRequest {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self { system: system.into(), user: user.into(), temperature: DEFAULT_TEMPERATURE, max_output_tokens: 1024 }
    }

    pub fn prompt_tokens(&self) -> usize {
        estimate_tokens(&self.system) + estimate_tokens(&self.user)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    /// Wall time from the first attempt to the successful response.
    pub latency_s: f64,
    pub attempt: u32,
}

/// Failure of a single upstream call.
#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "message", rename_all = "snake_case")]
pub enum ClientError {
    /// 5xx, timeouts, dropped connections.
    #[error("transient upstream failure: {0}")]
    Transient(String),
    /// 401/403 or a missing credential.
    #[error("authentication failed: {0}")]
    Auth(String),
    /// Other 4xx and malformed responses.
    #[error("request rejected: {0}")]
    Rejected(String),
}

impl ClientError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ClientError::Transient(_))
    }

    pub fn from_status(status: u16, body: &str) -> Self {
        let msg = format!("HTTP {status}: {}", body.chars().take(200).collect::<String>());
        match status {
            401 | 403 => ClientError::Auth(msg),
            408 | 429 => ClientError::Transient(msg),
            s if s >= 500 => ClientError::Transient(msg),
            _ => ClientError::Rejected(msg),
        }
    }
}

/// A chat-completion backend. Implementations must tolerate concurrent calls.
pub trait CompletionClient: Send + Sync {
    fn call(&self, req: &CompletionRequest) -> Result<String, ClientError>;
}

impl<C: CompletionClient + ?Sized> CompletionClient for std::sync::Arc<C> {
    fn call(&self, req: &CompletionRequest) -> Result<String, ClientError> {
        (**self).call(req)
    }
}

impl<C: CompletionClient + ?Sized> CompletionClient for &C {
    fn call(&self, req: &CompletionRequest) -> Result<String, ClientError> {
        (**self).call(req)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_s: f64,
    pub multiplier: f64,
    pub max_delay_s: f64,
    /// Fraction of each delay randomized, in [0, 1].
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, base_delay_s: 0.5, multiplier: 2.0, max_delay_s: 30.0, jitter: 0.2 }
    }
}

impl RetryPolicy {
    /// No waiting between attempts; handy for tests and mocks.
    pub fn immediate(max_attempts: u32) -> Self {
        Self { max_attempts, base_delay_s: 0.0, jitter: 0.0, ..Self::default() }
    }

    /// Delay before retry number `retry` (1 = first retry).
    pub fn delay(&self, retry: u32, rng: &mut impl Rng) -> Duration {
        let exp = self.multiplier.max(1.0).powi(retry.saturating_sub(1) as i32);
        let nominal = (self.base_delay_s * exp).min(self.max_delay_s).max(0.0);
        let jitter = self.jitter.clamp(0.0, 1.0);
        let factor = if jitter > 0.0 { 1.0 - jitter * rng.random::<f64>() } else { 1.0 };
        Duration::from_secs_f64(nominal * factor)
    }
}

/// Prompt-size guard. Over budget logs a warning unless `strict`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetGuard {
    pub max_prompt_tokens: Option<usize>,
    pub strict: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("all {attempts} attempts failed; last error: {last}")]
    Exhausted { attempts: u32, last: ClientError },
    #[error("authentication error: {0}")]
    AuthError(String),
    #[error("request rejected: {0}")]
    Rejected(String),
    #[error("prompt of ~{estimate} tokens exceeds budget of {budget}")]
    BudgetExceeded { estimate: usize, budget: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// Calls `client` until it succeeds, retrying transient failures with
/// exponential backoff.
pub fn complete(
    client: &dyn CompletionClient,
    req: &CompletionRequest,
    retry: &RetryPolicy,
) -> Result<CompletionResult, LlmError> {
    complete_guarded(client, req, retry, &BudgetGuard::default())
}

pub fn complete_guarded(
    client: &dyn CompletionClient,
    req: &CompletionRequest,
    retry: &RetryPolicy,
    budget: &BudgetGuard,
) -> Result<CompletionResult, LlmError> {
    if !(0.0..=2.0).contains(&req.temperature) {
        return Err(LlmError::InvalidRequest(format!("temperature {} outside [0, 2]", req.temperature)));
    }
    if retry.max_attempts == 0 {
        return Err(LlmError::InvalidRequest("max_attempts must be at least 1".into()));
    }
    if let Some(limit) = budget.max_prompt_tokens {
        let estimate = req.prompt_tokens();
        if estimate > limit {
            if budget.strict {
                return Err(LlmError::BudgetExceeded { estimate, budget: limit });
            }
            log::warn!("prompt of ~{estimate} tokens exceeds budget of {limit}");
        }
    }

    let started = Instant::now();
    let mut rng = rand::rng();
    let mut attempt = 0;
    loop {
        attempt += 1;
        match client.call(req) {
            Ok(text) => return Ok(CompletionResult { text, latency_s: started.elapsed().as_secs_f64(), attempt }),
            Err(ClientError::Auth(m)) => return Err(LlmError::AuthError(m)),
            Err(ClientError::Rejected(m)) => return Err(LlmError::Rejected(m)),
            Err(e) if attempt >= retry.max_attempts => return Err(LlmError::Exhausted { attempts: attempt, last: e }),
            Err(e) => {
                let wait = retry.delay(attempt, &mut rng);
                log::debug!("attempt {attempt} failed ({e}); retrying in {wait:?}");
                std::thread::sleep(wait);
            }
        }
    }
}

/// Counting semaphore bounding in-flight upstream calls.
#[derive(Debug)]
pub struct AdmissionGate {
    cap: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a> {
    gate: &'a AdmissionGate,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.gate.in_flight.lock().expect("gate lock");
        *n -= 1;
        self.gate.freed.notify_one();
    }
}

impl AdmissionGate {
    pub fn new(cap: usize) -> Self {
        Self { cap: cap.max(1), in_flight: Mutex::new(0), freed: Condvar::new() }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock().expect("gate lock");
        while *n >= self.cap {
            n = self.freed.wait(n).expect("gate lock");
        }
        *n += 1;
        Permit { gate: self }
    }
}

/// Wraps a client so at most `cap` calls run at once.
pub struct GatedClient<C> {
    inner: C,
    gate: AdmissionGate,
}

impl<C: CompletionClient> GatedClient<C> {
    pub fn new(inner: C, cap: usize) -> Self {
        Self { inner, gate: AdmissionGate::new(cap) }
    }

    pub fn cap(&self) -> usize {
        self.gate.cap()
    }
}

impl<C: CompletionClient> CompletionClient for GatedClient<C> {
    fn call(&self, req: &CompletionRequest) -> Result<String, ClientError> {
        let _permit = self.gate.acquire();
        self.inner.call(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::mock::{mock_client, ScriptedResponse};
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn req() -> CompletionRequest {
        CompletionRequest::new("sys", "user")
    }

    #[test]
    fn first_try_success() {
        let client = mock_client(vec![ScriptedResponse::ok("{}")]);
        let r = complete(&client, &req(), &RetryPolicy::immediate(3)).unwrap();
        assert_eq!(r.attempt, 1);
        assert_eq!(r.text, "{}");
    }

    #[test]
    fn retries_until_success() {
        let client = mock_client(vec![
            ScriptedResponse::transient("503"),
            ScriptedResponse::transient("timeout"),
            ScriptedResponse::ok("done"),
        ]);
        let r = complete(&client, &req(), &RetryPolicy::immediate(3)).unwrap();
        assert_eq!(r.attempt, 3);
        assert_eq!(client.calls(), 3);
    }

    #[test]
    fn exhausts_after_max_attempts() {
        let client = mock_client(vec![ScriptedResponse::transient("down")]);
        let err = complete(&client, &req(), &RetryPolicy::immediate(2)).unwrap_err();
        assert_eq!(err, LlmError::Exhausted { attempts: 2, last: ClientError::Transient("down".into()) });
        assert_eq!(client.calls(), 2);
    }

    #[test]
    fn auth_and_rejections_are_not_retried() {
        let client = mock_client(vec![ScriptedResponse::auth("bad key"), ScriptedResponse::ok("x")]);
        assert!(matches!(complete(&client, &req(), &RetryPolicy::immediate(5)), Err(LlmError::AuthError(_))));
        assert_eq!(client.calls(), 1);
        let client = mock_client(vec![ScriptedResponse::rejected("400")]);
        assert!(matches!(complete(&client, &req(), &RetryPolicy::immediate(5)), Err(LlmError::Rejected(_))));
        assert_eq!(client.calls(), 1);
    }

    #[test]
    fn call_count_is_min_of_success_index_and_cap() {
        for fails in 0..6u32 {
            for max in 1..6u32 {
                let mut script: Vec<_> = (0..fails).map(|_| ScriptedResponse::transient("x")).collect();
                script.push(ScriptedResponse::ok("y"));
                let client = mock_client(script);
                let out = complete(&client, &req(), &RetryPolicy::immediate(max));
                assert_eq!(client.calls() as u32, (fails + 1).min(max));
                assert_eq!(out.is_ok(), fails < max);
            }
        }
    }

    #[test]
    fn budget_guard() {
        let client = mock_client(vec![ScriptedResponse::ok("x")]);
        let big = CompletionRequest::new("s".repeat(400), "u".repeat(400));
        let strict = BudgetGuard { max_prompt_tokens: Some(100), strict: true };
        assert_eq!(
            complete_guarded(&client, &big, &RetryPolicy::immediate(1), &strict),
            Err(LlmError::BudgetExceeded { estimate: 200, budget: 100 })
        );
        assert_eq!(client.calls(), 0);
        let lax = BudgetGuard { strict: false, ..strict };
        assert!(complete_guarded(&client, &big, &RetryPolicy::immediate(1), &lax).is_ok());
    }

    #[test]
    fn rejects_bad_temperature() {
        let client = mock_client(vec![ScriptedResponse::ok("x")]);
        let mut r = req();
        r.temperature = 2.5;
        assert!(matches!(complete(&client, &r, &RetryPolicy::default()), Err(LlmError::InvalidRequest(_))));
    }

    #[test]
    fn backoff_grows_and_caps() {
        let p = RetryPolicy { jitter: 0.0, base_delay_s: 0.1, multiplier: 2.0, max_delay_s: 0.5, max_attempts: 9 };
        let mut rng = rand::rng();
        let d: Vec<f64> = (1..=5).map(|i| p.delay(i, &mut rng).as_secs_f64()).collect();
        assert!((d[0] - 0.1).abs() < 1e-9 && (d[1] - 0.2).abs() < 1e-9 && (d[2] - 0.4).abs() < 1e-9);
        assert!((d[3] - 0.5).abs() < 1e-9 && (d[4] - 0.5).abs() < 1e-9);
        let j = RetryPolicy { jitter: 0.5, ..p };
        for _ in 0..100 {
            let x = j.delay(1, &mut rng).as_secs_f64();
            assert!((0.05..=0.1).contains(&x));
        }
    }

    #[test]
    fn status_classification() {
        assert!(ClientError::from_status(503, "").is_retryable());
        assert!(ClientError::from_status(429, "").is_retryable());
        assert!(matches!(ClientError::from_status(401, ""), ClientError::Auth(_)));
        assert!(matches!(ClientError::from_status(404, ""), ClientError::Rejected(_)));
    }

    struct Slow {
        now: AtomicUsize,
        peak: AtomicUsize,
    }
    impl CompletionClient for Slow {
        fn call(&self, _: &CompletionRequest) -> Result<String, ClientError> {
            let n = self.now.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(n, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(5));
            self.now.fetch_sub(1, Ordering::SeqCst);
            Ok(String::new())
        }
    }

    #[test]
    fn gate_caps_in_flight() {
        let inner = Arc::new(Slow { now: AtomicUsize::new(0), peak: AtomicUsize::new(0) });
        let gated = GatedClient::new(inner.clone(), 3);
        std::thread::scope(|s| {
            for _ in 0..12 {
                s.spawn(|| {
                    for _ in 0..4 {
                        gated.call(&req()).unwrap();
                    }
                });
            }
        });
        let peak = inner.peak.load(Ordering::SeqCst);
        assert!((2..=3).contains(&peak), "peak {peak}");
    }
}
