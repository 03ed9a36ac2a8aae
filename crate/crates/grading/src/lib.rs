//! HTTP backend for the keyboard-driven image-quality grading tool.
//!
//! Endpoints:
//!
//! * `GET /session/{id}/next`: the current image of a session with its
//!   progress, or `410 Gone` once every image is graded.
//! * `GET /image/{image_id}`: raw image bytes.
//! * `POST /session/{id}/grade` with `{"image_id": .., "quality": ..}`:
//!   appends a record to the grades file, syncs it to disk, then advances
//!   the session. Answers `409` for an image other than the current one and
//!   `422` for an unknown quality.
//!
//! The grades file is the append-only CSV read by
//! [`rdr_core::dataset::read_gradability_file`]; on startup every image that
//! already has a record is skipped, so a restarted backend resumes where
//! the last acknowledged grade left off.

mod session;

use std::collections::{HashMap, HashSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rdr_core::dataset::{
    append_gradability, read_gradability_file, resolve_latest, DatasetManifest, GradabilityEntry,
};
use rdr_core::{Error, Quality, Result};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::Mutex;

pub use session::{GradingSession, Progress, SessionError};

pub const DEFAULT_INSTRUCTIONS: &str = "Judge whether the retina can be assessed. \
Keys: 1 excellent, 2 good, 3 adequate, 4 insufficient. \
Blurred, under-exposed or over-exposed photographs are insufficient.";

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub session_id: String,
    pub grader_id: String,
    pub image_ids: Vec<String>,
}

/// Splits the manifest, in order, into `shards` contiguous sessions named
/// `<base>-<i>`; a single shard is just `<base>`.
pub fn shard_sessions(
    manifest: &DatasetManifest,
    base: &str,
    grader_id: &str,
    shards: usize,
) -> Vec<SessionConfig> {
    let ids: Vec<String> = manifest.entries.iter().map(|e| e.image_id().to_string()).collect();
    let shards = shards.max(1);
    let per = ids.len().div_ceil(shards).max(1);
    (0..shards)
        .map(|i| SessionConfig {
            session_id: if shards == 1 { base.to_string() } else { format!("{base}-{i}") },
            grader_id: grader_id.to_string(),
            image_ids: ids.iter().skip(i * per).take(per).cloned().collect(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct GradingConfig {
    pub image_dir: PathBuf,
    pub grades_path: PathBuf,
    pub instructions: String,
    pub sessions: Vec<SessionConfig>,
}

struct Inner {
    images: HashMap<String, PathBuf>,
    grades_path: PathBuf,
    instructions: String,
    sessions: HashMap<String, Mutex<GradingSession>>,
    writer: StdMutex<()>,
}

#[derive(Clone)]
pub struct GradingState {
    inner: Arc<Inner>,
}

impl GradingState {
    /// Builds the sessions, skipping images that already have a record in
    /// the grades file.
    pub fn open(manifest: &DatasetManifest, config: GradingConfig) -> Result<Self> {
        let graded: HashSet<String> = match std::fs::metadata(&config.grades_path) {
            Ok(m) if m.len() > 0 => resolve_latest(&read_gradability_file(&config.grades_path)?)
                .into_keys()
                .collect(),
            _ => HashSet::new(),
        };
        let images = manifest
            .entries
            .iter()
            .map(|e| (e.image_id().to_string(), config.image_dir.join(&e.file_path)))
            .collect::<HashMap<_, _>>();
        let mut sessions = HashMap::new();
        for s in config.sessions {
            if let Some(missing) = s.image_ids.iter().find(|id| !images.contains_key(*id)) {
                return Err(Error::DataUnavailable(format!(
                    "session {} lists {missing}, which is not in the manifest",
                    s.session_id
                )));
            }
            let session = GradingSession::new(s.session_id.clone(), s.grader_id, s.image_ids, &graded);
            if sessions.insert(s.session_id.clone(), Mutex::new(session)).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate session {}", s.session_id)));
            }
        }
        Ok(GradingState {
            inner: Arc::new(Inner {
                images,
                grades_path: config.grades_path,
                instructions: config.instructions,
                sessions,
                writer: StdMutex::new(()),
            }),
        })
    }

    pub fn grades_path(&self) -> &Path {
        &self.inner.grades_path
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.inner.sessions.keys().cloned().collect();
        ids.sort();
        ids
    }
}

pub fn router(state: GradingState) -> Router {
    Router::new()
        .route("/session/{id}/next", get(next_image))
        .route("/session/{id}/grade", post(submit_grade))
        .route("/image/{image_id}", get(image_bytes))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: GradingState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("grading backend listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn error(status: StatusCode, body: serde_json::Value) -> Response {
    (status, Json(body)).into_response()
}

fn unknown_session(id: &str) -> Response {
    error(
        StatusCode::NOT_FOUND,
        json!({"error": "unknown_session", "session_id": id}),
    )
}

async fn next_image(State(state): State<GradingState>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(session) = state.inner.sessions.get(&id) else {
        return unknown_session(&id);
    };
    let s = session.lock().await;
    match s.next_image() {
        Ok(image_id) => Json(json!({
            "session_id": id,
            "image_id": image_id,
            "image_url": format!("/image/{image_id}"),
            "progress": s.progress(),
            "instructions": state.inner.instructions,
        }))
        .into_response(),
        Err(_) => error(
            StatusCode::GONE,
            json!({"error": "session_complete", "progress": s.progress()}),
        ),
    }
}

#[derive(Deserialize)]
struct GradeRequest {
    image_id: String,
    quality: String,
}

async fn submit_grade(
    State(state): State<GradingState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Response {
    let Some(session) = state.inner.sessions.get(&id) else {
        return unknown_session(&id);
    };
    let req: GradeRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                json!({"error": "malformed_request", "message": e.to_string()}),
            )
        }
    };
    let quality: Quality = match req.quality.parse() {
        Ok(q) => q,
        Err(_) => {
            return error(
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "unknown_quality", "quality": req.quality}),
            )
        }
    };

    // The session lock is held across the durable write so acknowledgements
    // and the file agree on order.
    let mut s = session.lock().await;
    match s.check_submission(&req.image_id) {
        Ok(()) => {}
        Err(SessionError::OutOfOrderSubmission { expected }) => {
            return error(
                StatusCode::CONFLICT,
                json!({"error": "out_of_order_submission", "image_id": req.image_id, "expected": expected}),
            )
        }
        Err(SessionError::SessionComplete) => {
            return error(StatusCode::GONE, json!({"error": "session_complete", "progress": s.progress()}))
        }
    }

    let entry = GradabilityEntry::from_quality(
        req.image_id.clone(),
        quality,
        Some(s.grader_id.clone()),
        chrono::Utc::now(),
    );
    let inner = state.inner.clone();
    let written = tokio::task::spawn_blocking(move || {
        let _guard = inner.writer.lock().unwrap_or_else(|p| p.into_inner());
        append_gradability(&inner.grades_path, &entry)
    })
    .await;
    match written {
        Ok(Ok(())) => {}
        Ok(Err(e)) => {
            log::error!("failed to persist grade for {}: {e}", req.image_id);
            return error(
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({"error": "storage_failure", "message": e.to_string()}),
            );
        }
        Err(e) => {
            return error(
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({"error": "storage_failure", "message": e.to_string()}),
            )
        }
    }

    let progress = s.mark_graded(&req.image_id).expect("checked above");
    Json(json!({
        "image_id": req.image_id,
        "quality": quality.as_str(),
        "status": if quality.is_gradable() { "gradable" } else { "ungradable" },
        "progress": progress,
    }))
    .into_response()
}

fn content_type(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("tif" | "tiff") => "image/tiff",
        _ => "application/octet-stream",
    }
}

async fn image_bytes(
    State(state): State<GradingState>,
    UrlPath(image_id): UrlPath<String>,
) -> Response {
    let Some(path) = state.inner.images.get(&image_id) else {
        return error(
            StatusCode::NOT_FOUND,
            json!({"error": "unknown_image", "image_id": image_id}),
        );
    };
    match tokio::fs::read(path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(path))], bytes).into_response(),
        Err(e) => error(
            StatusCode::NOT_FOUND,
            json!({"error": "image_unavailable", "image_id": image_id, "message": e.to_string()}),
        ),
    }
}
