use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobMode {
    Llm,
    Baseline,
    /// Both systems; records are persisted only if both succeed.
    Both,
}

impl std::str::FromStr for JobMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "llm" => Ok(Self::Llm),
            "baseline" | "ml" => Ok(Self::Baseline),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown mode {other:?} (expected llm, baseline or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_s: f64,
    /// Upstream completion time including retries; 0 for baseline-only jobs.
    pub llm_call_s: f64,
    /// Output parsing, snapping and trimming.
    pub parse_s: f64,
}

/// Why a job failed.
#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail")]
pub enum JobError {
    #[error("episode is not eligible: {0}")]
    IneligibleLanguage(String),
    #[error("bad episode input: {0}")]
    Input(String),
    #[error("transcript: {0}")]
    Transcript(String),
    #[error("prompt: {0}")]
    Prompt(String),
    #[error("completion: {0}")]
    Llm(String),
    #[error("model output: {0}")]
    Parse(String),
    #[error("selection: {0}")]
    Select(String),
    #[error("baseline: {0}")]
    Baseline(String),
    #[error("store: {0}")]
    Store(String),
    #[error("job panicked: {0}")]
    Panic(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("job {job_id}: cannot go from {from:?} to {to:?}")]
pub struct TransitionError {
    pub job_id: String,
    pub from: JobState,
    pub to: JobState,
}

/// Lifecycle `queued → running → done | failed`; timings only on done.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub episode_id: String,
    pub mode: JobMode,
    pub state: JobState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<JobError>,
}

impl Job {
    pub fn new(job_id: impl Into<String>, episode_id: impl Into<String>, mode: JobMode) -> Self {
        Self {
            job_id: job_id.into(),
            episode_id: episode_id.into(),
            mode,
            state: JobState::Queued,
            timings: None,
            error: None,
        }
    }

    fn transition(&mut self, to: JobState) -> Result<(), TransitionError> {
        let ok = matches!(
            (self.state, to),
            (JobState::Queued, JobState::Running)
                | (JobState::Running, JobState::Done)
                | (JobState::Running, JobState::Failed)
        );
        if !ok {
            return Err(TransitionError { job_id: self.job_id.clone(), from: self.state, to });
        }
        self.state = to;
        Ok(())
    }

    pub fn start(&mut self) -> Result<(), TransitionError> {
        self.transition(JobState::Running)
    }

    pub fn finish(&mut self, timings: Timings) -> Result<(), TransitionError> {
        self.transition(JobState::Done)?;
        self.timings = Some(timings);
        Ok(())
    }

    pub fn fail(&mut self, error: JobError) -> Result<(), TransitionError> {
        self.transition(JobState::Failed)?;
        self.error = Some(error);
        Ok(())
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.state, JobState::Done | JobState::Failed)
    }
}
