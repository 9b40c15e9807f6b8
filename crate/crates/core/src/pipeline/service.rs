use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::engine::Engine;
use super::job::{Job, JobMode};
use super::store::PreviewStore;
use super::worker::{run_job, WorkItem};
use crate::selector::PreviewSystem;
use crate::transcript::Episode;

/// Shared service state: engine, store and the in-memory job table.
pub struct AppState {
    engine: Arc<Engine>,
    store: Arc<PreviewStore>,
    jobs: Mutex<HashMap<String, Job>>,
    next_job: AtomicU64,
    bearer_token: Option<String>,
}

impl AppState {
    pub fn new(engine: Arc<Engine>, store: Arc<PreviewStore>) -> Arc<Self> {
        let bearer_token = engine.config().service.bearer_token.clone();
        Arc::new(Self { engine, store, jobs: Mutex::new(HashMap::new()), next_job: AtomicU64::new(0), bearer_token })
    }

    pub fn job(&self, job_id: &str) -> Option<Job> {
        self.jobs.lock().expect("jobs lock").get(job_id).cloned()
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn require_token(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.bearer_token {
        let presented = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token.as_str()) {
            return error(StatusCode::UNAUTHORIZED, "missing or wrong bearer token");
        }
    }
    next.run(req).await
}

#[derive(Deserialize)]
struct IngestQuery {
    mode: Option<String>,
}

async fn post_episode(State(state): State<Arc<AppState>>, Query(q): Query<IngestQuery>, body: Bytes) -> Response {
    let mode = match q.mode.as_deref().map(str::parse::<JobMode>).transpose() {
        Ok(m) => m.unwrap_or(JobMode::Llm),
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e),
    };
    let episode: Episode = match serde_json::from_slice(&body) {
        Ok(ep) => ep,
        Err(e) if e.is_syntax() || e.is_eof() => return error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    };
    if let Err(e) = episode.validate() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string());
    }

    let n = state.next_job.fetch_add(1, Ordering::Relaxed);
    let job_id = format!("job-{n:06}");
    let item = WorkItem::new(job_id.clone(), episode, mode);
    let queued = item.job.clone();
    state.jobs.lock().expect("jobs lock").insert(job_id.clone(), queued.clone());

    let st = state.clone();
    tokio::task::spawn_blocking(move || {
        if let Some(j) = st.jobs.lock().expect("jobs lock").get_mut(&item.job.job_id) {
            j.start().ok();
        }
        let finished = run_job(&st.engine, &st.store, item);
        st.jobs.lock().expect("jobs lock").insert(finished.job_id.clone(), finished);
    });

    (StatusCode::ACCEPTED, Json(json!({ "job_id": job_id, "episode_id": queued.episode_id, "state": queued.state })))
        .into_response()
}

async fn get_job(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.job(&id) {
        Some(job) => Json(job).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown job {id}")),
    }
}

#[derive(Deserialize)]
struct PreviewQuery {
    system: Option<String>,
}

/// With `?system=`, the active record for that system; otherwise all active
/// records of the episode as a list.
async fn get_preview(
    State(state): State<Arc<AppState>>,
    Path(episode_id): Path<String>,
    Query(q): Query<PreviewQuery>,
) -> Response {
    match q.system.as_deref().map(str::parse::<PreviewSystem>).transpose() {
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, e),
        Ok(Some(system)) => match state.store.active(&episode_id, system) {
            Some(r) => Json(r).into_response(),
            None => error(StatusCode::NOT_FOUND, format!("no {} preview for {episode_id}", system.as_str())),
        },
        Ok(None) => {
            let records = state.store.active_for_episode(&episode_id);
            if records.is_empty() {
                error(StatusCode::NOT_FOUND, format!("no preview for {episode_id}"))
            } else {
                Json(records).into_response()
            }
        }
    }
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    Json(json!({ "status": "ok", "active_records": state.store.active_count() })).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    let protected = Router::new()
        .route("/episodes", post(post_episode))
        .route("/jobs/{id}", get(get_job))
        .route("/previews/{episode_id}", get(get_preview))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new().route("/healthz", get(healthz)).merge(protected).with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    state: Arc<AppState>,
    addr: SocketAddr,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Blocking entry point used by the CLI: serves until Ctrl-C.
pub fn serve_blocking(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(serve(state, addr, async {
        let _ = tokio::signal::ctrl_c().await;
    }))
}
