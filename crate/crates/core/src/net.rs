//! Small HTTP helpers shared by every service: a background server handle
//! and a blocking JSON client.

use std::net::SocketAddr;
use std::thread::JoinHandle;
use std::time::Duration;

use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio::sync::oneshot;

use crate::canonical::to_canonical_bytes;

/// An axum router served on its own thread and runtime.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    /// Bind `addr` (use port 0 for an ephemeral port) and serve `router`.
    pub fn spawn(router: Router, addr: SocketAddr) -> std::io::Result<Self> {
        let listener = std::net::TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::Builder::new()
            .name(format!("http-{addr}"))
            .spawn(move || {
                let rt = tokio::runtime::Builder::new_multi_thread()
                    .worker_threads(2)
                    .enable_all()
                    .build()
                    .expect("tokio runtime");
                rt.block_on(async move {
                    let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
                    let _ = axum::serve(listener, router)
                        .with_graceful_shutdown(async {
                            let _ = rx.await;
                        })
                        .await;
                });
            })?;
        Ok(Self { addr, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn spawn_local(router: Router) -> std::io::Result<Self> {
        Self::spawn(router, SocketAddr::from(([127, 0, 0, 1], 0)))
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stop accepting connections and wait for the server thread.
    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HttpError {
    #[error("{url} unreachable: {reason}")]
    Unreachable { url: String, reason: String },
    #[error("{url} returned HTTP {status}: {body}")]
    Status { url: String, status: u16, body: String },
    #[error("{url} returned a malformed body: {reason}")]
    Malformed { url: String, reason: String },
}

impl HttpError {
    pub fn status(&self) -> Option<u16> {
        match self {
            HttpError::Status { status, .. } => Some(*status),
            _ => None,
        }
    }
}

/// Blocking HTTP client. Non-2xx answers become [`HttpError::Status`].
#[derive(Clone)]
pub struct HttpClient {
    agent: ureq::Agent,
    base: String,
}

impl HttpClient {
    pub fn new(base: impl Into<String>) -> Self {
        Self::with_timeout(base, Duration::from_secs(5))
    }

    pub fn with_timeout(base: impl Into<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent, base: base.into().trim_end_matches('/').to_string() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub fn get_bytes(&self, path: &str) -> Result<Vec<u8>, HttpError> {
        let url = self.url(path);
        let resp = self.agent.get(&url).call();
        Self::finish(url, resp)
    }

    pub fn post_bytes(&self, path: &str, body: &[u8], content_type: &str) -> Result<Vec<u8>, HttpError> {
        let url = self.url(path);
        let resp = self.agent.post(&url).header("content-type", content_type).send(body);
        Self::finish(url, resp)
    }

    pub fn put_bytes(&self, path: &str, body: &[u8]) -> Result<Vec<u8>, HttpError> {
        let url = self.url(path);
        let resp = self
            .agent
            .put(&url)
            .header("content-type", "application/json")
            .send(body);
        Self::finish(url, resp)
    }

    pub fn get_json<T: DeserializeOwned>(&self, path: &str) -> Result<T, HttpError> {
        let bytes = self.get_bytes(path)?;
        self.decode(path, &bytes)
    }

    pub fn post_json<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, HttpError> {
        let bytes = self.post_bytes(path, &to_canonical_bytes(body), "application/json")?;
        self.decode(path, &bytes)
    }

    pub fn put_json<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, HttpError> {
        let bytes = self.put_bytes(path, &to_canonical_bytes(body))?;
        self.decode(path, &bytes)
    }

    fn decode<T: DeserializeOwned>(&self, path: &str, bytes: &[u8]) -> Result<T, HttpError> {
        serde_json::from_slice(bytes).map_err(|e| HttpError::Malformed {
            url: self.url(path),
            reason: e.to_string(),
        })
    }

    fn finish(
        url: String,
        resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<Vec<u8>, HttpError> {
        let mut resp = resp.map_err(|e| HttpError::Unreachable { url: url.clone(), reason: e.to_string() })?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_vec()
            .map_err(|e| HttpError::Unreachable { url: url.clone(), reason: e.to_string() })?;
        if !(200..300).contains(&status) {
            return Err(HttpError::Status {
                url,
                status,
                body: String::from_utf8_lossy(&body).into_owned(),
            });
        }
        Ok(body)
    }
}

/// Canonical JSON response with the given status.
pub fn json_response<T: Serialize>(status: axum::http::StatusCode, body: &T) -> axum::response::Response {
    use axum::response::IntoResponse;
    (
        status,
        [(axum::http::header::CONTENT_TYPE, "application/json")],
        to_canonical_bytes(body),
    )
        .into_response()
}

/// `{"error": msg}` with the given status.
pub fn error_response(status: axum::http::StatusCode, msg: impl std::fmt::Display) -> axum::response::Response {
    json_response(status, &serde_json::json!({ "error": msg.to_string() }))
}
