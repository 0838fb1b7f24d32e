//! REST surface of the slicing controller.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use super::controller::{ControllerError, SlicingController};
use super::model::Wtp;
use super::source::LocalSliceApi;
use crate::net::{error_response, json_response};

#[derive(Deserialize)]
struct NewTenant {
    name: String,
    #[serde(default)]
    tenant_id: Option<String>,
}

#[derive(Deserialize)]
struct NewSlice {
    slice_id: String,
    quantum_ms: u64,
    #[serde(default)]
    wtps: Vec<String>,
}

#[derive(Deserialize)]
struct QuantumUpdate {
    quantum_ms: u64,
}

#[derive(Deserialize)]
struct WtpsUpdate {
    wtps: Vec<String>,
}

pub fn router(api: LocalSliceApi) -> Router {
    Router::new()
        .route("/api/v1/tenants", get(list_tenants).post(create_tenant))
        .route("/api/v1/tenants/{tid}", get(get_tenant))
        .route("/api/v1/tenants/{tid}/slices", post(create_slice))
        .route("/api/v1/tenants/{tid}/slices/{sid}", get(get_slice))
        .route("/api/v1/tenants/{tid}/slices/{sid}/quantum", put(update_quantum))
        .route("/api/v1/tenants/{tid}/slices/{sid}/wtps", put(update_wtps))
        .route("/api/v1/wtps", get(list_wtps).post(register_wtp))
        .with_state(api)
}

/// Router over a controller that is always online.
pub fn controller_router(controller: Arc<SlicingController>) -> Router {
    router(LocalSliceApi::new(controller))
}

fn controller_error(e: ControllerError) -> Response {
    let status = match e {
        ControllerError::NotFound(_) => StatusCode::NOT_FOUND,
        ControllerError::Conflict(_) => StatusCode::CONFLICT,
        ControllerError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
        ControllerError::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
        ControllerError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    error_response(status, e)
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error_response(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

fn offline() -> Response {
    error_response(StatusCode::SERVICE_UNAVAILABLE, "controller offline")
}

macro_rules! online {
    ($api:expr) => {
        if !$api.is_online() {
            return offline();
        }
    };
}

macro_rules! body {
    ($ty:ty, $bytes:expr) => {
        match parse_body::<$ty>(&$bytes) {
            Ok(v) => v,
            Err(r) => return r,
        }
    };
}

async fn list_tenants(State(api): State<LocalSliceApi>) -> Response {
    online!(api);
    json_response(StatusCode::OK, &json!({ "tenants": api.controller().tenants() }))
}

async fn create_tenant(State(api): State<LocalSliceApi>, bytes: Bytes) -> Response {
    online!(api);
    let req = body!(NewTenant, bytes);
    let result = match req.tenant_id {
        Some(id) => api.controller().create_tenant_with_id(&id, &req.name),
        None => api.controller().create_tenant(&req.name),
    };
    match result {
        Ok(t) => json_response(StatusCode::CREATED, &t),
        Err(e) => controller_error(e),
    }
}

async fn get_tenant(State(api): State<LocalSliceApi>, Path(tid): Path<String>) -> Response {
    online!(api);
    match api.controller().tenant(&tid) {
        Ok(t) => json_response(StatusCode::OK, &t),
        Err(e) => controller_error(e),
    }
}

async fn create_slice(State(api): State<LocalSliceApi>, Path(tid): Path<String>, bytes: Bytes) -> Response {
    online!(api);
    let req = body!(NewSlice, bytes);
    match api.controller().create_slice(&tid, &req.slice_id, req.quantum_ms, req.wtps) {
        Ok(s) => json_response(StatusCode::CREATED, &s),
        Err(e) => controller_error(e),
    }
}

async fn get_slice(State(api): State<LocalSliceApi>, Path((tid, sid)): Path<(String, String)>) -> Response {
    online!(api);
    match api.controller().get_slice(&tid, &sid) {
        Ok(bytes) => (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => controller_error(e),
    }
}

async fn update_quantum(
    State(api): State<LocalSliceApi>,
    Path((tid, sid)): Path<(String, String)>,
    bytes: Bytes,
) -> Response {
    online!(api);
    let req = body!(QuantumUpdate, bytes);
    match api.controller().update_quantum(&tid, &sid, req.quantum_ms) {
        Ok(s) => json_response(StatusCode::OK, &s),
        Err(e) => controller_error(e),
    }
}

async fn update_wtps(
    State(api): State<LocalSliceApi>,
    Path((tid, sid)): Path<(String, String)>,
    bytes: Bytes,
) -> Response {
    online!(api);
    let req = body!(WtpsUpdate, bytes);
    match api.controller().update_wtps(&tid, &sid, req.wtps) {
        Ok(s) => json_response(StatusCode::OK, &s),
        Err(e) => controller_error(e),
    }
}

async fn list_wtps(State(api): State<LocalSliceApi>) -> Response {
    online!(api);
    json_response(StatusCode::OK, &json!({ "wtps": api.controller().wtps() }))
}

async fn register_wtp(State(api): State<LocalSliceApi>, bytes: Bytes) -> Response {
    online!(api);
    let wtp = body!(Wtp, bytes);
    match api.controller().register_wtp(wtp) {
        Ok(w) => json_response(StatusCode::CREATED, &w),
        Err(e) => controller_error(e),
    }
}
