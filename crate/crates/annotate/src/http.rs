use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use sumtrace_core::audit::{AuditError, Submission};

use crate::service::{AnnotationService, ServiceError};

pub const SESSION_HEADER: &str = "x-session";
pub const TOKEN_HEADER: &str = "x-annotation-token";

#[derive(Clone)]
struct AppState {
    service: Arc<AnnotationService>,
    token: Option<Arc<str>>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            ServiceError::UnknownTask(_) => (StatusCode::NOT_FOUND, "unknown_task"),
            ServiceError::UnknownSummary(_) => (StatusCode::NOT_FOUND, "unknown_summary"),
            ServiceError::LeaseExpired(_) => (StatusCode::CONFLICT, "lease_expired"),
            ServiceError::InvalidInput(_) => (StatusCode::BAD_REQUEST, "invalid_input"),
            ServiceError::Audit(AuditError::StaleRevision { .. }) => (StatusCode::CONFLICT, "stale_revision"),
            ServiceError::Audit(AuditError::SchemaViolation(_)) => (StatusCode::UNPROCESSABLE_ENTITY, "schema_violation"),
            ServiceError::Audit(_) => (StatusCode::INTERNAL_SERVER_ERROR, "store_error"),
        };
        (status, Json(json!({ "error": code, "message": self.to_string() }))).into_response()
    }
}

fn session(headers: &HeaderMap) -> Result<String, ServiceError> {
    headers
        .get(SESSION_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|s| !s.trim().is_empty())
        .map(str::to_string)
        .ok_or_else(|| ServiceError::InvalidInput(format!("missing {SESSION_HEADER} header")))
}

async fn next_task(State(s): State<AppState>, headers: HeaderMap) -> Result<Response, ServiceError> {
    let session = session(&headers)?;
    Ok(match s.service.next_task(&session)? {
        Some(leased) => Json(json!({ "status": "leased", "lease": leased })).into_response(),
        None => Json(json!({ "status": "exhausted" })).into_response(),
    })
}

#[derive(Deserialize)]
struct SearchQuery {
    #[serde(default)]
    q: String,
}

async fn search(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<SearchQuery>,
) -> Result<Response, ServiceError> {
    Ok(Json(s.service.search(&id, &query.q)?).into_response())
}

async fn report(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(s.service.report(&id)?.report.clone()).into_response())
}

async fn submit(
    State(s): State<AppState>,
    Path(task_id): Path<u64>,
    headers: HeaderMap,
    Json(submission): Json<Submission>,
) -> Result<Response, ServiceError> {
    let session = session(&headers)?;
    let service = s.service.clone();
    let ack = tokio::task::spawn_blocking(move || service.submit(task_id, &session, submission))
        .await
        .map_err(|e| ServiceError::InvalidInput(e.to_string()))??;
    Ok(Json(ack).into_response())
}

async fn progress(State(s): State<AppState>) -> Response {
    Json(s.service.progress()).into_response()
}

async fn export(State(s): State<AppState>) -> Result<Response, ServiceError> {
    let csv = s.service.export_csv()?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}

async fn check_token(State(s): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &s.token {
        let given = req.headers().get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(token.as_ref()) {
            return (StatusCode::UNAUTHORIZED, Json(json!({ "error": "unauthorized", "message": "bad token" })))
                .into_response();
        }
    }
    next.run(req).await
}

/// Routes for the annotation UI. With `token` set every request must carry it.
pub fn router(service: Arc<AnnotationService>, token: Option<String>) -> Router {
    let state = AppState {
        service,
        token: token.map(Into::into),
    };
    Router::new()
        .route("/tasks/next", get(next_task))
        .route("/tasks/{id}/annotation", post(submit))
        .route("/reports/{id}", get(report))
        .route("/reports/{id}/search", get(search))
        .route("/progress", get(progress))
        .route("/export.csv", get(export))
        .layer(middleware::from_fn_with_state(state.clone(), check_token))
        .with_state(state)
}
