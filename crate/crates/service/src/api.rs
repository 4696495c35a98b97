//! HTTP/JSON session service.
//!
//! Sessions live in memory. Every mutation takes the session out of its
//! slot, runs on the blocking pool and puts it back, so at most one
//! computation per session is in flight while snapshots stay readable.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kbdebug::interactive::{InteractiveError, Reply, Session};
use serde::{Deserialize, Serialize};

use crate::input::{load, InputError, ParamsSpec, ProbSource};
use crate::snapshot::{SessionSnapshot, Status};

/// Body of `POST /sessions`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub dpi: String,
    /// Element probability file contents; uniform probabilities if absent.
    #[serde(default)]
    pub probs: Option<String>,
    #[serde(default)]
    pub uniform: bool,
    /// Adaptation factor for element probabilities.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub params: ParamsSpec,
}

/// Body of `POST /sessions/{id}/answer`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnswerBody {
    pub answer: Reply,
}

/// `?wait=true` holds the response until the computation has finished.
#[derive(Clone, Copy, Debug, Default, Deserialize)]
pub struct WaitParam {
    #[serde(default)]
    pub wait: bool,
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, kind, message: message.into(), line: None, column: None }
    }

    fn not_found(id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no session `{id}`"))
    }
}

impl From<InputError> for ApiError {
    fn from(e: InputError) -> ApiError {
        let (status, kind) = match e {
            InputError::Dpi(_) | InputError::Probs(_) => (StatusCode::BAD_REQUEST, "parse"),
            InputError::NotAdmissible => (StatusCode::UNPROCESSABLE_ENTITY, "not_admissible"),
            InputError::Params(_) => (StatusCode::BAD_REQUEST, "bad_params"),
        };
        let pos = e.position();
        ApiError { line: pos.map(|p| p.0), column: pos.and_then(|p| p.1), ..ApiError::new(status, kind, e.to_string()) }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

struct Slot {
    /// Absent while a computation holds it.
    session: Option<Session>,
    snapshot: Arc<SessionSnapshot>,
}

struct Entry {
    id: String,
    created_ms: u64,
    slot: Mutex<Slot>,
}

#[derive(Clone, Copy)]
enum Job {
    Advance,
    Answer(bool),
    Skip,
}

impl Entry {
    fn snapshot(&self) -> Arc<SessionSnapshot> {
        self.slot.lock().expect("slot lock").snapshot.clone()
    }

    /// Takes the session for `job` if it is waiting for one.
    fn begin(&self, job: Job) -> Result<Session, ApiError> {
        let mut slot = self.slot.lock().expect("slot lock");
        let ready = match job {
            Job::Advance => slot.snapshot.status == Status::Computing,
            Job::Answer(_) | Job::Skip => slot.snapshot.status == Status::AwaitingAnswer,
        };
        let session = match slot.session.take() {
            Some(s) if ready => s,
            other => {
                slot.session = other;
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "wrong_status",
                    format!("session is {:?}", slot.snapshot.status),
                ));
            }
        };
        let mut snap = (*slot.snapshot).clone();
        snap.status = Status::Computing;
        snap.error = None;
        slot.snapshot = Arc::new(snap);
        Ok(session)
    }

    /// Puts the session back after `job`; returns the new snapshot and the
    /// error a skip may report without harming the session.
    fn finish(&self, session: Session, result: Result<(), InteractiveError>, job: Job) -> Arc<SessionSnapshot> {
        let mut snap = SessionSnapshot::of(&self.id, self.created_ms, &session);
        match result {
            Ok(()) => {}
            Err(e) if matches!(job, Job::Skip) && session.pending().is_some() => snap.error = Some(e.to_string()),
            Err(e) => {
                snap.status = Status::Failed;
                snap.error = Some(e.to_string());
            }
        }
        let snap = Arc::new(snap);
        let mut slot = self.slot.lock().expect("slot lock");
        slot.session = Some(session);
        slot.snapshot = snap.clone();
        snap
    }

    fn fail(&self, message: String) -> Arc<SessionSnapshot> {
        let mut slot = self.slot.lock().expect("slot lock");
        let mut snap = (*slot.snapshot).clone();
        snap.status = Status::Failed;
        snap.error = Some(message);
        slot.snapshot = Arc::new(snap);
        slot.snapshot.clone()
    }
}

async fn run_job(entry: Arc<Entry>, mut session: Session, job: Job) -> Arc<SessionSnapshot> {
    let work = tokio::task::spawn_blocking(move || {
        let r = match job {
            Job::Advance => session.advance(),
            Job::Answer(a) => session.answer(a),
            Job::Skip => session.skip(),
        };
        (session, r)
    });
    match work.await {
        Ok((session, r)) => entry.finish(session, r, job),
        Err(e) => entry.fail(format!("computation aborted: {e}")),
    }
}

/// Starts `job` on `entry`, optionally waiting for its result.
async fn dispatch(entry: Arc<Entry>, job: Job, wait: bool) -> Result<Arc<SessionSnapshot>, ApiError> {
    let session = entry.begin(job)?;
    let task = tokio::spawn(run_job(entry.clone(), session, job));
    if !wait {
        return Ok(entry.snapshot());
    }
    let snap = task.await.map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    match (&snap.error, job, snap.status) {
        (Some(msg), Job::Skip, Status::AwaitingAnswer) => {
            Err(ApiError::new(StatusCode::CONFLICT, "pool_exhausted", msg.clone()))
        }
        _ => Ok(snap),
    }
}

/// In-memory session store.
#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Entry>>>,
}

impl AppState {
    fn get(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        self.sessions.read().expect("store lock").get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }
}

type Shared = Arc<AppState>;

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

async fn create(
    State(state): State<Shared>,
    Query(w): Query<WaitParam>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionSnapshot>), ApiError> {
    let source = match (req.probs, req.uniform) {
        (Some(_), true) => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_params", "give either `probs` or `uniform`"))
        }
        (Some(text), false) => ProbSource::Elements { text, c: req.c },
        (None, _) => ProbSource::Uniform,
    };
    let params = req.params.resolve()?;
    let (dpi, probs) = load(&req.dpi, &source)?;
    let session = Session::new(dpi, probs, params).map_err(|e| match e {
        InteractiveError::NotAdmissible => ApiError::from(InputError::NotAdmissible),
        other => ApiError::new(StatusCode::BAD_REQUEST, "bad_params", other.to_string()),
    })?;
    let id = uuid::Uuid::new_v4().to_string();
    let created_ms = now_ms();
    let snapshot = Arc::new(SessionSnapshot::of(&id, created_ms, &session));
    let entry =
        Arc::new(Entry { id: id.clone(), created_ms, slot: Mutex::new(Slot { session: Some(session), snapshot }) });
    state.sessions.write().expect("store lock").insert(id, entry.clone());
    let snap = dispatch(entry, Job::Advance, w.wait).await?;
    Ok((StatusCode::CREATED, Json((*snap).clone())))
}

async fn show(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionSnapshot>, ApiError> {
    Ok(Json((*state.get(&id)?.snapshot()).clone()))
}

async fn answer(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(w): Query<WaitParam>,
    Json(body): Json<AnswerBody>,
) -> Result<Json<SessionSnapshot>, ApiError> {
    let job = match body.answer {
        Reply::True => Job::Answer(true),
        Reply::False => Job::Answer(false),
        Reply::Skip => Job::Skip,
    };
    let snap = dispatch(state.get(&id)?, job, w.wait).await?;
    Ok(Json((*snap).clone()))
}

async fn remove(State(state): State<Shared>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match state.sessions.write().expect("store lock").remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(&id)),
    }
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

/// The API routes over a fresh store.
pub fn router() -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show).delete(remove))
        .route("/sessions/{id}/answer", post(answer))
        .with_state(Shared::default())
}

/// Serves the API until interrupted.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
