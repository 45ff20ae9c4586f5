// SPDX-License-Identifier: MIT OR Apache-2.0

//! Session-oriented HTTP+JSON API for interactive labeling.
//!
//! | method | path                                   | body / query                 |
//! |--------|----------------------------------------|------------------------------|
//! | GET    | `/api/health`                          |                              |
//! | POST   | `/api/sequences`                       | `{"values": [..]}`           |
//! | GET    | `/api/sequences/{id}`                  |                              |
//! | PUT    | `/api/sequences/{id}/labels`           | `{"labels": [{start,end,changes}]}` |
//! | GET    | `/api/sequences/{id}/fit`              | `?penalty=P&algorithm=A`     |
//!
//! Errors are `{"error": kind, "detail": message}` with a 4xx status for bad
//! input and 5xx for internal failures.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::data::DataSequence;
use crate::error::{Error, Result};
use crate::labels::{LabelSet, RawLabel};
use crate::metrics::{label_outcomes, LabelOutcome};
use crate::solver::{solve, Algorithm, Penalty, Segment};

pub const DEFAULT_MAX_LEN: usize = 1_000_000;

/// One uploaded sequence with its current labels.
#[derive(Clone, Debug)]
pub struct Session {
    pub sequence: Arc<DataSequence>,
    pub labels: Arc<LabelSet>,
    /// Bumped on every accepted label change.
    pub version: u64,
}

#[derive(Serialize, Deserialize)]
struct SessionSnapshot {
    id: String,
    values: Vec<f64>,
    labels: Vec<RawLabel>,
    version: u64,
}

/// In-memory session table.
#[derive(Debug)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Session>>,
    max_len: usize,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_LEN)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no sequence with id {0:?}")]
    NotFound(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl SessionStore {
    pub fn new(max_len: usize) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            max_len,
        }
    }

    pub fn create(&self, values: Vec<f64>) -> Result<String> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.insert(id.clone(), values)?;
        Ok(id)
    }

    /// Create a session under a caller-chosen id, replacing any existing one.
    pub fn insert(&self, id: String, values: Vec<f64>) -> Result<()> {
        if values.len() > self.max_len {
            return Err(Error::InvalidArgument(format!(
                "sequence has {} values; the limit is {}",
                values.len(),
                self.max_len
            )));
        }
        let seq = DataSequence::new(values)?;
        let labels = LabelSet::empty(seq.len());
        self.sessions.write().unwrap().insert(
            id,
            Session {
                sequence: Arc::new(seq),
                labels: Arc::new(labels),
                version: 0,
            },
        );
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<Session, StoreError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(id.to_owned()))
    }

    /// Validate and atomically replace the label set; returns the new version.
    pub fn put_labels(&self, id: &str, raw: Vec<RawLabel>) -> Result<u64, StoreError> {
        let mut sessions = self.sessions.write().unwrap();
        let session = sessions
            .get_mut(id)
            .ok_or_else(|| StoreError::NotFound(id.to_owned()))?;
        let labels = LabelSet::validate(raw, session.sequence.len())?;
        session.labels = Arc::new(labels);
        session.version += 1;
        Ok(session.version)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write one `<id>.json` file per session.
    pub fn snapshot_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let sessions = self.sessions.read().unwrap();
        for (id, s) in sessions.iter() {
            let snap = SessionSnapshot {
                id: id.clone(),
                values: s.sequence.values().to_vec(),
                labels: s.labels.iter().map(|l| RawLabel::from(*l)).collect(),
                version: s.version,
            };
            let path = dir.join(format!("{id}.json"));
            let text = serde_json::to_string(&snap).expect("snapshot serializes");
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    /// Restore sessions written by [`SessionStore::snapshot_to`].
    pub fn load_snapshots(&self, dir: &Path) -> Result<usize> {
        let mut loaded = 0;
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries.filter_map(|e| e.ok()) {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let snap: SessionSnapshot = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.line() as u64,
                message: e.to_string(),
            })?;
            let seq = DataSequence::new(snap.values)?;
            let labels = LabelSet::validate(snap.labels, seq.len())?;
            self.sessions.write().unwrap().insert(
                snap.id,
                Session {
                    sequence: Arc::new(seq),
                    labels: Arc::new(labels),
                    version: snap.version,
                },
            );
            loaded += 1;
        }
        Ok(loaded)
    }
}

/// JSON error body with its status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, detail: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            detail: detail.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.kind, "detail": self.detail }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", e.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", e.to_string()),
            StoreError::Invalid(inner) => inner.into(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

#[derive(Deserialize)]
struct CreateBody {
    values: Vec<Value>,
}

#[derive(Deserialize)]
struct LabelsBody {
    labels: Vec<RawLabel>,
}

#[derive(Deserialize)]
struct FitQuery {
    penalty: String,
    algorithm: Option<String>,
}

/// Fit result as returned by `GET /api/sequences/{id}/fit`.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitResponse {
    pub algorithm: Algorithm,
    /// A number, or the string `"inf"`.
    pub penalty: Value,
    pub changepoints: Vec<usize>,
    pub segments: Vec<Segment>,
    /// Penalized cost; square loss alone for the infinite penalty.
    pub cost: f64,
    pub label_outcomes: Vec<LabelOutcome>,
    pub version: u64,
}

/// Solve on an immutable snapshot of the session.
pub fn fit_session(session: &Session, penalty: Penalty, algorithm: Algorithm) -> Result<FitResponse> {
    let fit = solve(&session.sequence, &session.labels, penalty, algorithm)?;
    Ok(FitResponse {
        algorithm,
        penalty: match penalty {
            Penalty::Finite(v) => json!(v),
            Penalty::Infinite => json!("inf"),
        },
        label_outcomes: label_outcomes(&session.labels, &fit.changepoints),
        segments: fit.segments(),
        changepoints: fit.changepoints,
        cost: fit.cost,
        version: session.version,
    })
}

fn parse_value(i: usize, v: &Value) -> Result<f64, ApiError> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    };
    match x {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "validation",
            format!("value at position {} is not a finite number: {v}", i + 1),
        )),
    }
}

type Shared = Arc<SessionStore>;

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn create_sequence(
    State(store): State<Shared>,
    body: Result<Json<CreateBody>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let Json(body) = body?;
    let values = body
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| parse_value(i, v))
        .collect::<Result<Vec<_>, _>>()?;
    let id = store.create(values)?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

async fn get_sequence(State(store): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let s = store.get(&id)?;
    let labels: Vec<RawLabel> = s.labels.iter().map(|l| RawLabel::from(*l)).collect();
    Ok(Json(json!({
        "id": id,
        "values": s.sequence.values(),
        "labels": labels,
        "version": s.version,
    })))
}

async fn put_labels(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<LabelsBody>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let Json(body) = body?;
    let version = store.put_labels(&id, body.labels)?;
    Ok(Json(json!({ "version": version })))
}

async fn get_fit(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    query: Result<Query<FitQuery>, QueryRejection>,
) -> Result<Json<FitResponse>, ApiError> {
    let Query(q) = query?;
    let penalty: Penalty = q.penalty.parse()?;
    let algorithm: Algorithm = q.algorithm.as_deref().unwrap_or("lopart").parse()?;
    let session = store.get(&id)?;
    let fit = tokio::task::spawn_blocking(move || fit_session(&session, penalty, algorithm))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(fit))
}

const INDEX_HTML: &str = r#"<!doctype html>
<html><head><meta charset="utf-8"><title>lopart labeler</title></head>
<body>
<h1>lopart labeling service</h1>
<p>The browser labeler is built separately and served from this root when installed.
The JSON API lives under <code>/api</code>.</p>
</body></html>
"#;

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/health", get(health))
        .route("/api/sequences", post(create_sequence))
        .route("/api/sequences/{id}", get(get_sequence))
        .route("/api/sequences/{id}/labels", put(put_labels))
        .route("/api/sequences/{id}/fit", get(get_fit))
        .with_state(store)
}

#[derive(Clone, Debug, Default)]
pub struct ServeOptions {
    pub port: u16,
    /// Preload each corpus sequence as a session named by its id.
    pub corpus_dir: Option<PathBuf>,
    /// Restore sessions from, and save them to, this directory.
    pub snapshot_dir: Option<PathBuf>,
    pub max_len: Option<usize>,
}

/// Build the session store described by `opts`.
pub fn prepare_store(opts: &ServeOptions) -> Result<Shared> {
    let store = Arc::new(SessionStore::new(opts.max_len.unwrap_or(DEFAULT_MAX_LEN)));
    if let Some(dir) = &opts.corpus_dir {
        for entry in crate::io::read_corpus(dir)? {
            store.insert(entry.id.clone(), entry.data.values().to_vec())?;
            let raw: Vec<RawLabel> = entry.labels.iter().map(|l| RawLabel::from(*l)).collect();
            if !raw.is_empty() {
                store.put_labels(&entry.id, raw).map_err(|e| match e {
                    StoreError::Invalid(inner) => inner,
                    StoreError::NotFound(id) => Error::InvalidArgument(id),
                })?;
            }
        }
    }
    if let Some(dir) = &opts.snapshot_dir {
        if dir.exists() {
            store.load_snapshots(dir)?;
        }
    }
    Ok(store)
}

/// Serve until Ctrl-C, then write snapshots if configured.
pub async fn serve(opts: ServeOptions) -> Result<()> {
    let store = prepare_store(&opts)?;
    let addr = SocketAddr::from(([127, 0, 0, 1], opts.port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(format!("{addr}"), e))?;
    let local = listener.local_addr().map_err(|e| Error::io(format!("{addr}"), e))?;
    eprintln!("listening on http://{local}");
    axum::serve(listener, router(store.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(format!("{local}"), e))?;
    if let Some(dir) = &opts.snapshot_dir {
        store.snapshot_to(dir)?;
    }
    Ok(())
}
