//! HTTP routes over a shared [`Service`].
//!
//! | Method | Path | Result |
//! |---|---|---|
//! | POST | `/repositories` | 201, repository resource |
//! | GET | `/repositories` | list of repository resources |
//! | GET | `/repositories/{id}` | repository resource |
//! | POST | `/repositories/{id}/harvest?incremental=` | 202, `{job_id}` |
//! | GET | `/jobs/{job_id}` | harvest job status |
//! | GET | `/repositories/{id}/centrality?ddc=&top=&mode=&format=` | XML (default) or JSON ranking |
//! | GET | `/repositories/{id}/network.png?ddc=&top=&seed=` | PNG plot |
//! | GET | `/schema/centrality` | XML schema of the ranking document |
//!
//! Errors carry a JSON body `{"error": <code>, "message": <text>}`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use super::{CentralityQuery, PlotQuery, RepositoryEntry, Service, ServiceError, CENTRALITY_XSD};

pub const XML_CONTENT_TYPE: &str = "application/xml; charset=utf-8";
pub const JSON_CONTENT_TYPE: &str = "application/json";
/// Set on plot responses: whether nodes were left out, and how many.
pub const TRUNCATED_HEADER: &str = "x-plot-truncated";
pub const OMITTED_HEADER: &str = "x-plot-omitted-nodes";

type Params = Query<HashMap<String, String>>;

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Config(_) | ServiceError::InvalidParameter(_) => StatusCode::BAD_REQUEST,
            ServiceError::UnknownRepository(_)
            | ServiceError::UnknownJob(_)
            | ServiceError::EmptyPartition(_) => StatusCode::NOT_FOUND,
            ServiceError::DuplicateRepository(_) | ServiceError::JobRunning(_) => StatusCode::CONFLICT,
            ServiceError::Harvest(_) => StatusCode::BAD_GATEWAY,
            ServiceError::Snapshot(_) | ServiceError::Io { .. } | ServiceError::Internal(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/repositories", post(register).get(list_repositories))
        .route("/repositories/{id}", get(repository))
        .route("/repositories/{id}/harvest", post(harvest))
        .route("/repositories/{id}/centrality", get(centrality))
        .route("/repositories/{id}/network.png", get(network_png))
        .route("/jobs/{job_id}", get(job))
        .route("/schema/centrality", get(schema))
        .with_state(service)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    service: Arc<Service>,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

async fn register(State(service): State<Arc<Service>>, body: Bytes) -> Result<Response, ServiceError> {
    let entry: RepositoryEntry = serde_json::from_slice(&body)
        .map_err(|e| ServiceError::InvalidParameter(format!("request body: {e}")))?;
    let status = blocking(move || service.register(entry)).await?;
    let location = format!("/repositories/{}", status.repository_id);
    let mut resp = (StatusCode::CREATED, Json(status)).into_response();
    resp.headers_mut().insert(
        header::LOCATION,
        HeaderValue::from_str(&location).map_err(|e| ServiceError::Internal(e.to_string()))?,
    );
    Ok(resp)
}

async fn list_repositories(State(service): State<Arc<Service>>) -> Result<Response, ServiceError> {
    let all = service
        .repository_ids()
        .iter()
        .map(|id| service.status(id))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Json(all).into_response())
}

async fn repository(State(service): State<Arc<Service>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(service.status(&id)?).into_response())
}

async fn harvest(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Response, ServiceError> {
    let incremental = match params.get("incremental").map(String::as_str) {
        None | Some("false") | Some("0") => false,
        Some("true") | Some("1") => true,
        Some(other) => {
            return Err(ServiceError::InvalidParameter(format!(
                "incremental must be true or false, got {other:?}"
            )))
        }
    };
    let job = service.start_harvest(&id, incremental)?;
    let job_id = job.id();
    let mut resp = (
        StatusCode::ACCEPTED,
        Json(json!({ "job_id": job_id, "state": job.state() })),
    )
        .into_response();
    resp.headers_mut().insert(
        header::LOCATION,
        HeaderValue::from_str(&format!("/jobs/{job_id}")).map_err(|e| ServiceError::Internal(e.to_string()))?,
    );
    Ok(resp)
}

async fn job(State(service): State<Arc<Service>>, Path(job_id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(service.job(&job_id)?).into_response())
}

async fn centrality(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Response, ServiceError> {
    let get = |k: &str| params.get(k).map(String::as_str);
    let query = CentralityQuery::parse(get("ddc"), get("top"), get("mode"), service.config().default_top_k)?;
    let json = match get("format") {
        None | Some("xml") => false,
        Some("json") => true,
        Some(other) => {
            return Err(ServiceError::InvalidParameter(format!(
                "format must be xml or json, got {other:?}"
            )))
        }
    };
    let response = blocking(move || service.centrality(&id, &query)).await?;
    let (content_type, body) = if json {
        (JSON_CONTENT_TYPE, response.to_json())
    } else {
        (XML_CONTENT_TYPE, response.to_xml())
    };
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}

async fn network_png(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Response, ServiceError> {
    let get = |k: &str| params.get(k).map(String::as_str);
    let query = PlotQuery::parse(get("ddc"), get("top"), get("seed"), service.config().default_top_k)?;
    let plot = blocking(move || service.plot(&id, &query)).await?;
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    headers.insert(
        TRUNCATED_HEADER,
        HeaderValue::from_static(if plot.truncated() { "true" } else { "false" }),
    );
    headers.insert(OMITTED_HEADER, HeaderValue::from(plot.omitted_nodes));
    Ok((headers, plot.png).into_response())
}

async fn schema() -> Response {
    ([(header::CONTENT_TYPE, XML_CONTENT_TYPE)], CENTRALITY_XSD).into_response()
}
