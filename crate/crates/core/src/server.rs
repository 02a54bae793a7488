//! HTTP front end for participant sessions.
//!
//! | route | purpose |
//! |---|---|
//! | `GET /annotate/{token}` | dashboard page |
//! | `GET /api/v1/session/{token}` | session bundle (JSON) |
//! | `POST /api/v1/session/{token}/log` | submit a canonical log, returns the validation report |
//! | `GET /media/{project}/{file}` | media files, with `Range` support |
//! | `GET /assets/*` | dashboard build output, when an assets directory is configured |

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{DefaultBodyLimit, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tower::ServiceExt;
use tower_http::services::{ServeDir, ServeFile};

use crate::config::ServerConfig;
use crate::model::check_project_id;
use crate::store::{is_plain_file_name, Store, StoreError};

/// Logs for hour-long sessions stay well under this.
const MAX_LOG_BYTES: usize = 16 * 1024 * 1024;

#[derive(Clone)]
struct AppState {
    store: Arc<Store>,
}

pub fn router(store: Arc<Store>, assets_dir: Option<PathBuf>) -> Router {
    let mut app = Router::new()
        .route("/annotate/{token}", get(dashboard_page))
        .route("/api/v1/session/{token}", get(session_bundle))
        .route(
            "/api/v1/session/{token}/log",
            post(submit_log).layer(DefaultBodyLimit::max(MAX_LOG_BYTES)),
        )
        .route("/media/{project}/{file}", get(media));
    if let Some(dir) = assets_dir {
        app = app.nest_service("/assets", ServeDir::new(dir));
    }
    app.with_state(AppState { store })
}

pub async fn serve(config: ServerConfig) -> std::io::Result<()> {
    let store = Arc::new(config.store());
    let app = router(store, config.assets_dir.clone());
    let listener = tokio::net::TcpListener::bind(&config.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, data = %config.data_dir.display(), "serving");
    axum::serve(listener, app).await
}

fn error_response(err: &StoreError) -> Response {
    let (status, kind) = match err {
        StoreError::UnknownToken
        | StoreError::UnknownProject(_)
        | StoreError::UnknownSlot { .. } => (StatusCode::NOT_FOUND, "not_found"),
        StoreError::AlreadyConsumed => (StatusCode::CONFLICT, "already_consumed"),
        StoreError::Decode(_) => (StatusCode::BAD_REQUEST, "malformed"),
        StoreError::Mismatch(_) => (StatusCode::UNPROCESSABLE_ENTITY, "mismatch"),
        StoreError::Rejected(report) => {
            return (
                StatusCode::UNPROCESSABLE_ENTITY,
                Json(json!({ "status": "rejected", "error": err.to_string(), "report": report })),
            )
                .into_response()
        }
        _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
    };
    if status == StatusCode::INTERNAL_SERVER_ERROR {
        tracing::error!(error = %err, "request failed");
    }
    (
        status,
        Json(json!({ "status": kind, "error": err.to_string() })),
    )
        .into_response()
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, StoreError> + Send + 'static,
) -> Result<T, Response> {
    match tokio::task::spawn_blocking(f).await {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(error_response(&e)),
        Err(join) => {
            tracing::error!(error = %join, "worker panicked");
            Err(StatusCode::INTERNAL_SERVER_ERROR.into_response())
        }
    }
}

async fn session_bundle(State(state): State<AppState>, Path(token): Path<String>) -> Response {
    let store = state.store.clone();
    match blocking(move || store.session_bundle(&token)).await {
        Ok(bundle) => Json(bundle).into_response(),
        Err(resp) => resp,
    }
}

async fn submit_log(
    State(state): State<AppState>,
    Path(token): Path<String>,
    body: Bytes,
) -> Response {
    let store = state.store.clone();
    match blocking(move || store.ingest_log(&token, &body)).await {
        Ok(outcome) => {
            let status = if outcome.duplicate {
                "duplicate"
            } else {
                "stored"
            };
            Json(json!({ "status": status, "file_name": outcome.file_name, "report": outcome.report }))
                .into_response()
        }
        Err(resp) => resp,
    }
}

async fn dashboard_page(State(state): State<AppState>, Path(token): Path<String>) -> Response {
    let store = state.store.clone();
    let lookup = token.clone();
    match blocking(move || store.find_session(&lookup)).await {
        Ok(session) => Html(dashboard_html(&session.token)).into_response(),
        Err(resp) => resp,
    }
}

fn dashboard_html(token: &str) -> String {
    // tokens are [A-Za-z0-9_-] only, safe to embed verbatim
    format!(
        r#"<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>Annotation</title>
<link rel="stylesheet" href="/assets/dashboard.css">
</head>
<body>
<main id="dashboard" data-session-token="{token}" data-bundle-url="/api/v1/session/{token}" data-log-url="/api/v1/session/{token}/log">
<noscript>This annotation dashboard needs JavaScript.</noscript>
</main>
<script type="module" src="/assets/dashboard.js"></script>
</body>
</html>
"#
    )
}

async fn media(
    State(state): State<AppState>,
    Path((project, file)): Path<(String, String)>,
    req: Request,
) -> Response {
    if check_project_id(&project).is_err() || !is_plain_file_name(&file) {
        return StatusCode::NOT_FOUND.into_response();
    }
    let path = state.store.media_dir(&project).join(&file);
    if !path.is_file() {
        return StatusCode::NOT_FOUND.into_response();
    }
    let (parts, _) = req.into_parts();
    let req = Request::from_parts(parts, Body::empty());
    match ServeFile::new(path).oneshot(req).await {
        Ok(resp) => {
            let mut resp = resp.map(Body::new);
            resp.headers_mut().insert(
                header::ACCEPT_RANGES,
                header::HeaderValue::from_static("bytes"),
            );
            resp
        }
        Err(never) => match never {},
    }
}
