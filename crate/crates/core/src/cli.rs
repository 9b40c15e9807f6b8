//! Command-line front end. Exit codes: 0 success, 1 a job failed, 2 usage,
//! input or config error.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::evallab::{
    build_campaign, export_campaign, read_jsonl, render_report, summarize_campaign, AssignmentKey, CampaignKey,
    CampaignPair, Judgment, ReportOptions, Slot, TieConvention,
};
use crate::llm::{CompletionClient, MockClient};
use crate::pipeline::service::{serve_blocking, AppState};
use crate::pipeline::{Engine, JobError, JobMode, PipelineConfig, PreviewStore, StoredRecord, WorkItem};
use crate::transcript::Episode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_JOB_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "podpreview", version, about = "Extract and evaluate podcast previews")]
pub struct Cli {
    /// Pipeline config (TOML or JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Scripted completion responses to use instead of the HTTP client.
    #[arg(long, global = true, value_name = "SCRIPT")]
    pub mock_llm: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// LLM preview for one episode file, printed as JSON.
    Extract { episode: PathBuf },
    /// Baseline preview for one episode file, printed as JSON.
    Baseline { episode: PathBuf },
    /// Process a directory of episode JSON files or an episode JSONL file into the store.
    Batch {
        input: PathBuf,
        #[arg(long, default_value = "llm")]
        mode: JobMode,
        /// Overrides `store.path`.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Overrides `worker.concurrency`.
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Evaluation campaigns.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// HTTP service over the store.
    Serve {
        #[arg(long)]
        bind: Option<SocketAddr>,
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Shuffle pairs into a blind item export plus a key file.
    Build {
        /// JSONL of `{episode, llm, ml}` pairs.
        pairs: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        key: PathBuf,
    },
    /// Unblind judgments and print the statistics report.
    Stats {
        judgments: PathBuf,
        /// Key file from `eval build`. Without it, each judgment must carry `llm_slot`.
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long, default_value = "exclude_ties")]
        convention: TieConvention,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha_question: f64,
        /// Print the statistics as JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
}

/// Error carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn job_failed(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_JOB_FAILED, message: message.into() }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    match &cli.config {
        Some(p) => PipelineConfig::from_path(p).map_err(|e| usage(e.to_string())),
        None => Ok(PipelineConfig::default()),
    }
}

fn load_engine(cli: &Cli, config: PipelineConfig, needs_llm: bool) -> Result<Engine, Failure> {
    let client: Option<Arc<dyn CompletionClient>> = match &cli.mock_llm {
        Some(p) => Some(Arc::new(MockClient::from_path(p).map_err(usage)?)),
        None if needs_llm => {
            return Engine::with_http(config).map_err(|e| usage(e.to_string()));
        }
        None => None,
    };
    Engine::new(config, client).map_err(|e| usage(e.to_string()))
}

fn load_episode(path: &Path) -> Result<Episode, Failure> {
    if !path.exists() {
        return Err(usage(format!("{}: no such file", path.display())));
    }
    Episode::from_path(path).map_err(|e| usage(e.to_string()))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("value serializes"));
}

fn single(cli: &Cli, path: &Path, mode: JobMode) -> Result<(), Failure> {
    let episode = load_episode(path)?;
    let engine = load_engine(cli, load_config(cli)?, mode != JobMode::Baseline)?;
    let ex = engine.extract(&episode, mode).map_err(|e: JobError| job_failed(e.to_string()))?;
    for r in ex.records {
        print_json(&StoredRecord { seq: 0, job_id: None, record: r, timings: ex.timings });
    }
    Ok(())
}

fn batch_items(input: &Path, mode: JobMode) -> Result<Vec<WorkItem>, Failure> {
    let broken = |i: usize, label: String, reason: String| {
        WorkItem::broken(format!("job-{i:06}"), label, mode, JobError::Input(reason))
    };
    let make = |i: usize, label: String, parsed: Result<Episode, String>| match parsed {
        Ok(ep) => WorkItem::new(format!("job-{i:06}"), ep, mode),
        Err(reason) => broken(i, label, reason),
    };
    if input.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(input)
            .map_err(|e| usage(format!("{}: {e}", input.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        Ok(paths
            .into_iter()
            .enumerate()
            .map(|(i, p)| make(i, p.display().to_string(), Episode::from_path(&p).map_err(|e| e.to_string())))
            .collect())
    } else if input.is_file() {
        let text = std::fs::read_to_string(input).map_err(|e| usage(format!("{}: {e}", input.display())))?;
        Ok(text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                make(i, format!("{}:{}", input.display(), i + 1), Episode::from_json(line).map_err(|e| e.to_string()))
            })
            .collect())
    } else {
        Err(usage(format!("{}: no such file or directory", input.display())))
    }
}

fn batch(
    cli: &Cli,
    input: &Path,
    mode: JobMode,
    store: Option<&Path>,
    concurrency: Option<usize>,
) -> Result<(), Failure> {
    let mut config = load_config(cli)?;
    if let Some(s) = store {
        config.store.path = s.to_path_buf();
    }
    if let Some(n) = concurrency {
        config.worker.concurrency = n;
    }
    let items = batch_items(input, mode)?;
    let store = PreviewStore::open(&config.store.path).map_err(|e| usage(e.to_string()))?;
    let n = config.worker.concurrency;
    let engine = load_engine(cli, config, mode != JobMode::Baseline)?;
    let summary = crate::pipeline::run_worker(&engine, &store, items, n, |job| {
        println!("{}", serde_json::to_string(&job).expect("job serializes"));
    })
    .map_err(|e| usage(e.to_string()))?;
    eprintln!(
        "{} done, {} failed; store {} holds {} active records",
        summary.done,
        summary.failed,
        store.path().display(),
        store.active_count()
    );
    if summary.failed > 0 {
        return Err(job_failed(format!("{} job(s) failed", summary.failed)));
    }
    Ok(())
}

#[derive(Deserialize)]
struct KeyedJudgment {
    #[serde(flatten)]
    judgment: Judgment,
    #[serde(default)]
    llm_slot: Option<Slot>,
}

fn eval(cmd: &EvalCommand) -> Result<(), Failure> {
    let exists = |p: &Path| if p.exists() { Ok(()) } else { Err(usage(format!("{}: no such file", p.display()))) };
    match cmd {
        EvalCommand::Build { pairs, seed, out, key } => {
            exists(pairs)?;
            let pairs: Vec<CampaignPair> = read_jsonl(pairs).map_err(|e| usage(e.to_string()))?;
            let items = build_campaign(&pairs, *seed).map_err(|e| usage(e.to_string()))?;
            export_campaign(&items, out, key).map_err(|e| usage(e.to_string()))?;
            eprintln!("{} items written to {}, key to {}", items.len(), out.display(), key.display());
            Ok(())
        }
        EvalCommand::Stats { judgments, key, convention, alpha, alpha_question, json } => {
            exists(judgments)?;
            let rows: Vec<KeyedJudgment> = read_jsonl(judgments).map_err(|e| usage(e.to_string()))?;
            let campaign_key = match key {
                Some(k) => {
                    exists(k)?;
                    CampaignKey::from_keys(read_jsonl::<AssignmentKey>(k).map_err(|e| usage(e.to_string()))?)
                }
                None => CampaignKey::from_keys(
                    rows.iter()
                        .map(|r| {
                            r.llm_slot
                                .map(|llm_slot| AssignmentKey {
                                    item_id: r.judgment.item_id.clone(),
                                    llm_slot,
                                    shuffle_seed: 0,
                                })
                                .ok_or_else(|| usage(format!("{}: no --key and no llm_slot", r.judgment.item_id)))
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                ),
            };
            let judgments: Vec<Judgment> = rows.into_iter().map(|r| r.judgment).collect();
            let stats = summarize_campaign(&campaign_key, &judgments, *convention).map_err(|e| usage(e.to_string()))?;
            if *json {
                print_json(&stats);
            } else {
                let opts = ReportOptions { alpha_overall: *alpha, alpha_question: *alpha_question };
                print!("{}", render_report(&stats, &opts));
            }
            Ok(())
        }
    }
}

fn serve(cli: &Cli, bind: Option<SocketAddr>, store: Option<&Path>) -> Result<(), Failure> {
    let mut config = load_config(cli)?;
    if let Some(s) = store {
        config.store.path = s.to_path_buf();
    }
    let addr: SocketAddr = match bind {
        Some(a) => a,
        None => config.service.bind.parse().map_err(|e| usage(format!("service.bind: {e}")))?,
    };
    let store = Arc::new(PreviewStore::open(&config.store.path).map_err(|e| usage(e.to_string()))?);
    let engine = Arc::new(load_engine(cli, config, true)?);
    serve_blocking(AppState::new(engine, store), addr).map_err(|e| usage(format!("serving on {addr}: {e}")))
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Extract { episode } => single(cli, episode, JobMode::Llm),
        Command::Baseline { episode } => single(cli, episode, JobMode::Baseline),
        Command::Batch { input, mode, store, concurrency } => batch(cli, input, *mode, store.as_deref(), *concurrency),
        Command::Eval(cmd) => eval(cmd),
        Command::Serve { bind, store } => serve(cli, *bind, store.as_deref()),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("podpreview: {}", f.message);
            f.code
        }
    }
}
