//! Read-only HTTP API over a concept bundle.
//!
//! A bundle directory holds `vocab.json`, `svd.json` + `svd.bin` and optionally
//! `context_labels.json` (one label per context) and `emergence.json`. Every response body
//! is the JSON serialization of a `ntpgeo_core` value; handlers only parse requests and map
//! errors to status codes.

mod session;

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use session::{ExpandRequest, Meta, OrthantRequest, Session, SessionError, MAX_TOP};

#[derive(Clone)]
struct AppState {
    session: Arc<Session>,
    static_dir: Option<Arc<PathBuf>>,
}

/// JSON error body with its status code.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::TopTooLarge(_) => StatusCode::PAYLOAD_TOO_LARGE,
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Core(ntpgeo_core::Error::UnknownConcept { .. }) => StatusCode::NOT_FOUND,
            SessionError::Core(_) | SessionError::BadRequest(_) => StatusCode::BAD_REQUEST,
            SessionError::Load(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.message, "status": self.status.as_u16() });
        (self.status, json_headers(), body.to_string()).into_response()
    }
}

fn json_headers() -> [(header::HeaderName, HeaderValue); 1] {
    [(header::CONTENT_TYPE, HeaderValue::from_static("application/json; charset=utf-8"))]
}

fn json(bytes: Vec<u8>) -> Response {
    (StatusCode::OK, json_headers(), bytes).into_response()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptQuery {
    side: Option<String>,
    top: Option<usize>,
}

async fn meta(State(app): State<AppState>) -> Result<Response, ApiError> {
    Ok(json(app.session.meta_json()?))
}

async fn concept(
    State(app): State<AppState>,
    UrlPath(k): UrlPath<String>,
    query: Result<Query<ConceptQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let k: usize = k.parse().map_err(|_| ApiError::bad_request(format!("concept index must be a number, got {k:?}")))?;
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let side = q.side.as_deref().unwrap_or("word").parse().map_err(SessionError::Core)?;
    Ok(json(app.session.concept_json(k, side, q.top.unwrap_or(40))?))
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

async fn orthant(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: OrthantRequest = parse_body(&body)?;
    Ok(json(app.session.orthant_json(&req)?))
}

async fn expand(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: ExpandRequest = parse_body(&body)?;
    Ok(json(app.session.expand_json(&req)?))
}

async fn trace(State(app): State<AppState>) -> Result<Response, ApiError> {
    Ok(json(app.session.trace_json()?))
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json") => "application/json; charset=utf-8",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}

async fn static_file(State(app): State<AppState>, uri: Uri) -> Response {
    let not_found = || {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: format!("no route for {}", uri.path()),
        }
        .into_response()
    };
    let Some(root) = app.static_dir.as_deref() else {
        return not_found();
    };
    let rel = Path::new(uri.path().trim_start_matches('/'));
    if rel.starts_with("api") || rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return not_found();
    }
    let mut path = root.join(rel);
    if rel.as_os_str().is_empty() || path.is_dir() {
        path = path.join("index.html");
    }
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let ct = HeaderValue::from_static(content_type(&path));
            (StatusCode::OK, [(header::CONTENT_TYPE, ct)], bytes).into_response()
        }
        Err(_) => not_found(),
    }
}

fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(origin) = origin.to_str() else {
        return false;
    };
    ["http://localhost", "http://127.0.0.1", "http://[::1]"].iter().any(|base| {
        origin
            .strip_prefix(base)
            .is_some_and(|rest| rest.is_empty() || (rest.starts_with(':') && rest[1..].chars().all(|c| c.is_ascii_digit())))
    })
}

/// The API router; static files are served from `static_dir` when given.
pub fn router(session: Arc<Session>, static_dir: Option<PathBuf>) -> Router {
    let state = AppState {
        session,
        static_dir: static_dir.map(Arc::new),
    };
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin, _| is_local_origin(origin)))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/meta", get(meta))
        .route("/api/concept/{k}", get(concept))
        .route("/api/orthant", post(orthant))
        .route("/api/expand", post(expand))
        .route("/api/trace", get(trace))
        .fallback(static_file)
        .layer(cors)
        .with_state(state)
}

/// Bind `addr` and serve until the process is stopped.
pub async fn serve(session: Arc<Session>, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(session, static_dir)).await
}
