//! Batch and service orchestration around both extraction systems.
//!
//! An [`Engine`] turns one episode into preview records. [`run_worker`]
//! drives many episodes through it with a fixed number of executors and
//! persists results in an append-only [`PreviewStore`]; the HTTP service in
//! [`service`] does the same one request at a time.

mod config;
mod engine;
mod job;
pub mod service;
mod store;
mod worker;

pub use config::{
    AdCueSettings, ClientSettings, ConfigError, PipelineConfig, ServiceSettings, StoreSettings, WorkerSettings,
};
pub use engine::{Engine, Extraction};
pub use job::{Job, JobError, JobMode, JobState, Timings, TransitionError};
pub use store::{PreviewStore, StoreError, StoredRecord};
pub use worker::{run_episodes, run_job, run_worker, WorkItem, WorkerError, WorkerSummary};
