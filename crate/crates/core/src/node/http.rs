//! Node status: `GET /runs`, `GET /jobs`, `POST /jobs`.

use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::Response;
use axum::routing::get;
use axum::Router;

use super::job::JobSpec;
use super::oracle_node::{NodeError, OracleNode};
use crate::net::{error_response, json_response};

type Shared = Arc<Mutex<OracleNode>>;

pub fn router(node: Shared) -> Router {
    Router::new()
        .route("/runs", get(runs))
        .route("/jobs", get(jobs).post(register))
        .with_state(node)
}

async fn with_node<T: Send + 'static>(node: Shared, f: impl FnOnce(&mut OracleNode) -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(move || f(&mut node.lock().unwrap()))
        .await
        .expect("node task")
}

async fn runs(State(node): State<Shared>) -> Response {
    let runs = with_node(node, |n| n.runs().to_vec()).await;
    json_response(StatusCode::OK, &runs)
}

async fn jobs(State(node): State<Shared>) -> Response {
    let jobs = with_node(node, |n| n.jobs()).await;
    json_response(StatusCode::OK, &jobs)
}

async fn register(State(node): State<Shared>, body: Bytes) -> Response {
    let spec: JobSpec = match serde_json::from_slice(&body) {
        Ok(s) => s,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("malformed job spec: {e}")),
    };
    match with_node(node, move |n| n.register_job(spec)).await {
        Ok(job_id) => json_response(StatusCode::CREATED, &serde_json::json!({ "job_id": job_id })),
        Err(e @ NodeError::DuplicateJob(_)) => error_response(StatusCode::CONFLICT, e),
        Err(e) => error_response(StatusCode::UNPROCESSABLE_ENTITY, e),
    }
}
