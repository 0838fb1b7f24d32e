//! `POST /pin`, `POST /validate` and `GET /audits`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::Response;
use axum::routing::{get, post};
use axum::Router;

use super::auditor::{AuditorAdapter, MemoryAuditLog};
use super::pin::IpfsPinAdapter;
use super::request::{AdapterError, AdapterRequest};
use crate::content_store::StoreError;
use crate::net::{error_response, json_response};

#[derive(Clone)]
pub struct AdapterService {
    pub pin: IpfsPinAdapter,
    pub auditor: AuditorAdapter,
    /// Exposed at `GET /audits` when present.
    pub log: Option<MemoryAuditLog>,
}

pub fn router(service: AdapterService) -> Router {
    Router::new()
        .route("/pin", post(pin))
        .route("/validate", post(validate))
        .route("/audits", get(audits))
        .with_state(Arc::new(service))
}

fn adapter_error(e: AdapterError) -> Response {
    let status = match &e {
        e if e.is_client_error() => StatusCode::BAD_REQUEST,
        AdapterError::Store(StoreError::CapacityExceeded { .. }) => StatusCode::INSUFFICIENT_STORAGE,
        _ => StatusCode::BAD_GATEWAY,
    };
    error_response(status, e)
}

fn parse(body: &[u8]) -> Result<AdapterRequest, Response> {
    serde_json::from_slice(body).map_err(|e| error_response(StatusCode::BAD_REQUEST, format!("malformed request: {e}")))
}

async fn pin(State(svc): State<Arc<AdapterService>>, body: Bytes) -> Response {
    let req = match parse(&body) {
        Ok(r) => r,
        Err(r) => return r,
    };
    let adapter = svc.pin.clone();
    match tokio::task::spawn_blocking(move || adapter.handle(&req)).await.expect("pin task") {
        Ok(out) => json_response(StatusCode::OK, &out),
        Err(e) => adapter_error(e),
    }
}

async fn validate(State(svc): State<Arc<AdapterService>>, body: Bytes) -> Response {
    let req = match parse(&body) {
        Ok(r) => r,
        Err(r) => return r,
    };
    let auditor = svc.auditor.clone();
    match tokio::task::spawn_blocking(move || auditor.handle(&req)).await.expect("audit task") {
        Ok(report) => json_response(StatusCode::OK, &report),
        Err(e) => adapter_error(e),
    }
}

async fn audits(State(svc): State<Arc<AdapterService>>) -> Response {
    match &svc.log {
        Some(log) => json_response(StatusCode::OK, &log.records()),
        None => error_response(StatusCode::NOT_FOUND, "audit log not exposed"),
    }
}
