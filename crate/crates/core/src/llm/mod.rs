//! Completion clients and the structured-output contract.

mod client;
mod http;
pub mod mock;
mod output;

pub use client::{
    complete, complete_guarded, AdmissionGate, BudgetGuard, ClientError, CompletionClient, CompletionRequest,
    CompletionResult, GatedClient, LlmError, Permit, RetryPolicy, DEFAULT_MAX_IN_FLIGHT, DEFAULT_TEMPERATURE,
};
pub use http::{HttpClient, HttpClientConfig};
pub use mock::{mock_client, FailKind, MockClient, ScriptedResponse};
pub use output::{
    normalize_hashtag, parse_llm_output, ParseError, PreviewChoice, PreviewMetadata, DEFAULT_OUTPUT_SPEC,
};
