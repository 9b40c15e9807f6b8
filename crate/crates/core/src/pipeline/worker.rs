use std::panic::{catch_unwind, AssertUnwindSafe};

use crossbeam_channel::bounded;
use thiserror::Error;

use super::engine::Engine;
use super::job::{Job, JobError, JobMode, JobState};
use super::store::PreviewStore;
use crate::transcript::Episode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkerError {
    #[error("worker concurrency must be at least 1")]
    ZeroConcurrency,
}

/// One queued unit: the job plus its input. A bad input becomes a failed job.
#[derive(Debug, Clone)]
pub struct WorkItem {
    pub job: Job,
    pub episode: Result<Episode, JobError>,
}

impl WorkItem {
    pub fn new(job_id: impl Into<String>, episode: Episode, mode: JobMode) -> Self {
        Self { job: Job::new(job_id, episode.episode_id.clone(), mode), episode: Ok(episode) }
    }

    /// Input that could not be loaded, e.g. an unreadable file.
    pub fn broken(job_id: impl Into<String>, label: impl Into<String>, mode: JobMode, error: JobError) -> Self {
        Self { job: Job::new(job_id, label, mode), episode: Err(error) }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkerSummary {
    pub done: usize,
    pub failed: usize,
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Runs one job to a terminal state and persists its records.
pub fn run_job(engine: &Engine, store: &PreviewStore, item: WorkItem) -> Job {
    let WorkItem { mut job, episode } = item;
    job.start().expect("queued job starts");
    let outcome = episode.and_then(|ep| {
        catch_unwind(AssertUnwindSafe(|| engine.extract(&ep, job.mode)))
            .unwrap_or_else(|p| Err(JobError::Panic(panic_message(p))))
    });
    let outcome = outcome.and_then(|ex| {
        for r in ex.records {
            store.append(r, Some(job.job_id.clone()), ex.timings).map_err(|e| JobError::Store(e.to_string()))?;
        }
        Ok(ex.timings)
    });
    match outcome {
        Ok(t) => job.finish(t).expect("running job finishes"),
        Err(e) => {
            log::warn!("job {} ({}) failed: {e}", job.job_id, job.episode_id);
            job.fail(e).expect("running job fails");
        }
    }
    job
}

/// Processes `items` with `concurrency` executors and calls `on_job` on the
/// calling thread as each job ends. One job's failure or panic never stops
/// the others.
pub fn run_worker<I>(
    engine: &Engine,
    store: &PreviewStore,
    items: I,
    concurrency: usize,
    mut on_job: impl FnMut(Job),
) -> Result<WorkerSummary, WorkerError>
where
    I: IntoIterator<Item = WorkItem>,
    I::IntoIter: Send,
{
    if concurrency == 0 {
        return Err(WorkerError::ZeroConcurrency);
    }
    let (work_tx, work_rx) = bounded::<WorkItem>(concurrency * 2);
    let (done_tx, done_rx) = bounded::<Job>(concurrency * 2);
    let mut summary = WorkerSummary::default();
    let items = items.into_iter();

    std::thread::scope(|s| {
        s.spawn(move || {
            for item in items {
                if work_tx.send(item).is_err() {
                    break;
                }
            }
        });
        for _ in 0..concurrency {
            let (rx, tx) = (work_rx.clone(), done_tx.clone());
            s.spawn(move || {
                for item in rx {
                    let _ = tx.send(run_job(engine, store, item));
                }
            });
        }
        drop(done_tx);
        drop(work_rx);
        for job in done_rx {
            match job.state {
                JobState::Done => summary.done += 1,
                _ => summary.failed += 1,
            }
            on_job(job);
        }
    });
    Ok(summary)
}

/// `run_worker` over plain episodes with ids `job-000000`, `job-000001`, ...;
/// returns jobs in input order.
pub fn run_episodes(
    engine: &Engine,
    store: &PreviewStore,
    episodes: Vec<Episode>,
    mode: JobMode,
    concurrency: usize,
) -> Result<Vec<Job>, WorkerError> {
    let items: Vec<WorkItem> =
        episodes.into_iter().enumerate().map(|(i, ep)| WorkItem::new(format!("job-{i:06}"), ep, mode)).collect();
    let mut jobs = Vec::with_capacity(items.len());
    run_worker(engine, store, items, concurrency, |j| jobs.push(j))?;
    jobs.sort_by(|a, b| a.job_id.cmp(&b.job_id));
    Ok(jobs)
}
