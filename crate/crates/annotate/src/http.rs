use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use crate::{AnnotationSession, AnnotationState, PolygonDocument, SessionError};

#[derive(Clone)]
struct AppState {
    session: Arc<AnnotationSession>,
    ui_dir: Option<PathBuf>,
}

struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let msg = self.0.to_string();
        let (status, body) = match &self.0 {
            SessionError::NotFound(_) => (StatusCode::NOT_FOUND, json!({ "error": msg })),
            SessionError::InvalidRing { ring, .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": msg, "ring": ring }))
            }
            SessionError::Invalid(_) | SessionError::NothingToExport => {
                (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": msg }))
            }
            SessionError::Conflict(_) => (StatusCode::CONFLICT, json!({ "error": msg })),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": msg })),
        };
        (status, Json(body)).into_response()
    }
}

const PLACEHOLDER: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>handforge annotate</title></head>
<body><h1>handforge annotation service</h1>
<p>No UI bundle configured. The API is under <code>/api</code>:
<code>GET /api/images</code>, <code>GET /api/images/{id}</code>,
<code>GET|PUT /api/annotations/{id}</code>, <code>POST /api/export</code>.</p>
</body></html>
";

/// All routes over a shared session. `ui_dir`, when set, is served as
/// static files with `index.html` at `/`.
pub fn router(session: Arc<AnnotationSession>, ui_dir: Option<PathBuf>) -> Router {
    Router::new()
        .route("/api/images", get(list_images))
        .route("/api/images/{id}", get(get_image))
        .route("/api/annotations/{id}", get(get_annotation).put(put_annotation))
        .route("/api/export", post(export))
        .route("/", get(index))
        .fallback(get(static_file))
        .with_state(AppState { session, ui_dir })
}

async fn list_images(State(st): State<AppState>) -> impl IntoResponse {
    Json(st.session.list_images())
}

async fn get_image(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let bytes = st.session.image_png(&id)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn get_annotation(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    Ok(match st.session.get_annotation(&id)? {
        Some(a) => Json(a).into_response(),
        None => Json(json!({ "image_id": id, "state": AnnotationState::Unannotated, "rings": [] })).into_response(),
    })
}

#[derive(Deserialize)]
struct SaveQuery {
    state: Option<AnnotationState>,
}

async fn put_annotation(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<SaveQuery>,
    Json(doc): Json<PolygonDocument>,
) -> Result<Response, ApiError> {
    if doc.image_id != id {
        return Err(SessionError::Invalid(format!("body image_id {:?} does not match {id:?}", doc.image_id)).into());
    }
    let session = st.session.clone();
    let state = q.state.unwrap_or(AnnotationState::Committed);
    let stored = tokio::task::spawn_blocking(move || session.put_annotation(&id, doc.rings, state))
        .await
        .expect("save task panicked")?;
    Ok(Json(stored).into_response())
}

async fn export(State(st): State<AppState>) -> Result<Response, ApiError> {
    let session = st.session.clone();
    let manifest = tokio::task::spawn_blocking(move || session.export())
        .await
        .expect("export task panicked")?;
    Ok(Json(json!({
        "path": st.session.export_path(),
        "records": manifest.records.len(),
    }))
    .into_response())
}

async fn index(State(st): State<AppState>) -> Response {
    match &st.ui_dir {
        Some(dir) => serve_file(&dir.join("index.html")).await,
        None => Html(PLACEHOLDER).into_response(),
    }
}

async fn static_file(State(st): State<AppState>, uri: axum::http::Uri) -> Response {
    let Some(dir) = &st.ui_dir else {
        return StatusCode::NOT_FOUND.into_response();
    };
    let rel = Path::new(uri.path().trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return StatusCode::NOT_FOUND.into_response();
    }
    serve_file(&dir.join(rel)).await
}

async fn serve_file(path: &Path) -> Response {
    let mime = match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    };
    match tokio::fs::read(path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, mime)], bytes).into_response(),
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub image_dir: PathBuf,
    /// Where per-image annotation files are kept.
    pub store_dir: PathBuf,
    pub export_path: PathBuf,
    pub ui_dir: Option<PathBuf>,
    pub addr: SocketAddr,
}

/// Bind and serve until ctrl-c. `on_ready` receives the bound address.
pub async fn serve(cfg: ServeConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let session = Arc::new(AnnotationSession::open(&cfg.image_dir, &cfg.store_dir, &cfg.export_path)?);
    let listener = tokio::net::TcpListener::bind(cfg.addr)
        .await
        .map_err(|e| format!("cannot bind {}: {e}", cfg.addr))?;
    on_ready(listener.local_addr()?);
    axum::serve(listener, router(session, cfg.ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
