//! Podcast preview extraction: timestamped transcripts, LLM prompting and
//! output parsing, a signal-fusion baseline, A/B evaluation statistics, and
//! a batch/HTTP pipeline around them.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cli;
pub mod evallab;
pub mod gate;
pub mod llm;
pub mod pipeline;
pub mod promptkit;
pub mod selector;
pub mod transcript;
