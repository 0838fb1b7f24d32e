//! HTTP facade: `POST /objects?pin=` and `GET /objects/{cid}`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::json;

use super::{Cid, ContentStore, ObjectStore, StoreError};
use crate::net::{error_response, json_response, HttpClient, HttpError};

#[derive(Deserialize)]
struct AddQuery {
    #[serde(default)]
    pin: bool,
}

pub fn router(store: Arc<ContentStore>) -> Router {
    Router::new()
        .route("/objects", post(add).get(list))
        .route("/objects/{cid}", get(fetch))
        .route("/objects/{cid}/pin", post(pin))
        .route("/objects/{cid}/unpin", post(unpin))
        .route("/gc", post(gc))
        .with_state(store)
}

fn store_error(e: StoreError) -> Response {
    let status = match e {
        StoreError::NotFound(_) => StatusCode::NOT_FOUND,
        StoreError::CapacityExceeded { .. } => StatusCode::INSUFFICIENT_STORAGE,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    error_response(status, e)
}

fn parse_cid(text: &str) -> Result<Cid, Response> {
    text.parse().map_err(|e| error_response(StatusCode::BAD_REQUEST, e))
}

async fn add(State(store): State<Arc<ContentStore>>, Query(q): Query<AddQuery>, body: Bytes) -> Response {
    match store.add(&body, q.pin) {
        Ok(cid) => json_response(StatusCode::OK, &json!({ "cid": cid })),
        Err(e) => store_error(e),
    }
}

async fn list(State(store): State<Arc<ContentStore>>) -> Response {
    json_response(StatusCode::OK, &store.list())
}

async fn fetch(State(store): State<Arc<ContentStore>>, Path(cid): Path<String>) -> Response {
    let cid = match parse_cid(&cid) {
        Ok(c) => c,
        Err(r) => return r,
    };
    match store.get(&cid) {
        Ok(bytes) => (StatusCode::OK, bytes).into_response(),
        Err(e) => store_error(e),
    }
}

async fn pin(State(store): State<Arc<ContentStore>>, Path(cid): Path<String>) -> Response {
    let cid = match parse_cid(&cid) {
        Ok(c) => c,
        Err(r) => return r,
    };
    match store.pin(&cid) {
        Ok(()) => json_response(StatusCode::OK, &json!({ "cid": cid, "pinned": true })),
        Err(e) => store_error(e),
    }
}

async fn unpin(State(store): State<Arc<ContentStore>>, Path(cid): Path<String>) -> Response {
    let cid = match parse_cid(&cid) {
        Ok(c) => c,
        Err(r) => return r,
    };
    match store.unpin(&cid) {
        Ok(()) => json_response(StatusCode::OK, &json!({ "cid": cid, "pinned": false })),
        Err(e) => store_error(e),
    }
}

async fn gc(State(store): State<Arc<ContentStore>>) -> Response {
    match store.gc() {
        Ok(removed) => json_response(StatusCode::OK, &json!({ "removed": removed })),
        Err(e) => store_error(e),
    }
}

/// Remote store reached over the facade above.
#[derive(Clone)]
pub struct HttpObjectStore {
    client: HttpClient,
}

impl HttpObjectStore {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self { client: HttpClient::new(base_url) }
    }

    pub fn list(&self) -> Result<serde_json::Value, HttpError> {
        self.client.get_json("/objects")
    }
}

fn remote_error(cid: Option<&Cid>, e: HttpError) -> StoreError {
    match (e.status(), cid) {
        (Some(404), Some(c)) => StoreError::NotFound(c.clone()),
        _ => StoreError::Unavailable(e.to_string()),
    }
}

impl ObjectStore for HttpObjectStore {
    fn add(&self, content: &[u8], pin: bool) -> Result<Cid, StoreError> {
        #[derive(Deserialize)]
        struct Added {
            cid: Cid,
        }
        let path = format!("/objects?pin={pin}");
        let body = self
            .client
            .post_bytes(&path, content, "application/octet-stream")
            .map_err(|e| remote_error(None, e))?;
        let added: Added = serde_json::from_slice(&body)
            .map_err(|e| StoreError::Unavailable(format!("malformed add response: {e}")))?;
        Ok(added.cid)
    }

    fn get(&self, cid: &Cid) -> Result<Vec<u8>, StoreError> {
        self.client
            .get_bytes(&format!("/objects/{cid}"))
            .map_err(|e| remote_error(Some(cid), e))
    }
}
