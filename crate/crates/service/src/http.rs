//! JSON-over-HTTP facade.
//!
//! | method | path                              | body / query                       |
//! |--------|-----------------------------------|------------------------------------|
//! | POST   | `/api/traces`                     | raw text or provider JSON; `?backend=&field_path=` |
//! | GET    | `/api/traces`                     | index of stored traces             |
//! | GET    | `/api/traces/{id}`                | structured document                |
//! | GET    | `/api/traces/{id}/stats`          | stats JSON                         |
//! | POST   | `/api/traces/{id}/layout`         | `{view, state, viewport}`          |
//! | GET    | `/api/traces/{id}/export.svg`     | `?view=&width=&height=&expanded_phase=&expanded_subphase=` |
//! | GET    | `/`                               | UI bundle                          |
//!
//! Errors come back as `{"error": {"code", "message", "stage"?}}`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use retrace_core::layout::{ExpansionState, View, Viewport};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::service::{Backend, Service, ServiceError, Stage, SubmitOptions};

const PLACEHOLDER_UI: &str = include_str!("placeholder.html");

pub fn router(service: Arc<Service>) -> Router {
    let api = Router::new()
        .route("/api/traces", post(submit).get(list))
        .route("/api/traces/{id}", get(fetch))
        .route("/api/traces/{id}/stats", get(stats))
        .route("/api/traces/{id}/layout", post(layout))
        .route("/api/traces/{id}/export.svg", get(export));
    let app = match service.ui_dir() {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER_UI) })),
    };
    app.with_state(service)
}

struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let status = match &e {
            ServiceError::Pipeline(p) => match (p.stage, p.code) {
                (Stage::Separator, _) => StatusCode::BAD_REQUEST,
                (Stage::Annotator, "ProviderError") => StatusCode::BAD_GATEWAY,
                _ => StatusCode::UNPROCESSABLE_ENTITY,
            },
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadState(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = json!({ "code": e.code(), "message": e.to_string() });
        if let ServiceError::Pipeline(p) = &e {
            body["stage"] = json!(p.stage);
        }
        (status, Json(json!({ "error": body }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(ServiceError::BadRequest(msg.into()))
}

/// Runs blocking service work (disk, LLM calls) off the async workers.
async fn blocking<T, F>(service: Arc<Service>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .map_err(|e| ApiError(ServiceError::Storage(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

#[derive(Debug, Deserialize)]
struct SubmitQuery {
    backend: Option<String>,
    field_path: Option<String>,
}

async fn submit(State(svc): State<Arc<Service>>, Query(q): Query<SubmitQuery>, body: Bytes) -> ApiResult<Response> {
    let backend = match q.backend.as_deref() {
        None | Some("") => Backend::default(),
        Some(b) => b.parse().map_err(bad_request)?,
    };
    let text = String::from_utf8(body.to_vec()).map_err(|_| bad_request("body is not UTF-8"))?;
    let opts = SubmitOptions { backend, field_path: q.field_path };
    let out = blocking(svc, move |s| s.submit(&text, &opts)).await?;
    let status = if out.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(out)).into_response())
}

async fn list(State(svc): State<Arc<Service>>) -> ApiResult<Response> {
    let index = blocking(svc, |s| Ok(s.store().list()?)).await?;
    Ok(Json(index).into_response())
}

async fn fetch(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Response> {
    let record = blocking(svc, move |s| s.get(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], record.document).into_response())
}

async fn stats(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Response> {
    let stats = blocking(svc, move |s| s.stats(&id)).await?;
    Ok(Json(stats).into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutRequest {
    #[serde(default)]
    view: View,
    #[serde(default)]
    state: ExpansionState,
    #[serde(default)]
    viewport: Viewport,
}

async fn layout(State(svc): State<Arc<Service>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: LayoutRequest = if body.iter().all(u8::is_ascii_whitespace) {
        LayoutRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| bad_request(format!("invalid layout request: {e}")))?
    };
    let tree = blocking(svc, move |s| s.layout(&id, req.view, &req.state, req.viewport)).await?;
    Ok(Json(tree).into_response())
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    view: Option<String>,
    width: Option<f64>,
    height: Option<f64>,
    expanded_phase: Option<usize>,
    expanded_subphase: Option<String>,
}

async fn export(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(q): Query<ExportQuery>,
) -> ApiResult<Response> {
    let view: View = q.view.as_deref().unwrap_or("spacefill").parse().map_err(bad_request)?;
    let d = Viewport::default();
    let vp = Viewport::new(q.width.unwrap_or(d.width()), q.height.unwrap_or(d.height()))
        .map_err(|e| bad_request(e.to_string()))?;
    let state = ExpansionState { expanded_phase: q.expanded_phase, expanded_subphase: q.expanded_subphase };
    let svg = blocking(svc, move |s| s.export(&id, view, &state, vp)).await?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}
