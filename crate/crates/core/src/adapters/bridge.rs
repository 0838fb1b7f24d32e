use serde_json::Value;

use super::auditor::AuditorAdapter;
use super::pin::IpfsPinAdapter;
use super::request::{AdapterError, AdapterRequest};
use crate::net::{HttpClient, HttpError};

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("adapter unreachable: {0}")]
    Unreachable(String),
    #[error("adapter rejected the request ({status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("adapter returned a malformed payload: {0}")]
    Malformed(String),
}

impl From<AdapterError> for BridgeError {
    fn from(e: AdapterError) -> Self {
        let status = if e.is_client_error() { 400 } else { 502 };
        BridgeError::Rejected { status, message: e.to_string() }
    }
}

/// How the node reaches an external adapter.
pub trait Bridge: Send + Sync {
    fn call(&self, req: &AdapterRequest) -> Result<Value, BridgeError>;
}

/// In-process adapter, same contract as the HTTP endpoints.
#[derive(Clone)]
pub enum LocalBridge {
    Pin(IpfsPinAdapter),
    Audit(AuditorAdapter),
}

impl Bridge for LocalBridge {
    fn call(&self, req: &AdapterRequest) -> Result<Value, BridgeError> {
        let out = match self {
            LocalBridge::Pin(a) => serde_json::to_value(a.handle(req)?),
            LocalBridge::Audit(a) => serde_json::to_value(a.handle(req)?),
        };
        out.map_err(|e| BridgeError::Malformed(e.to_string()))
    }
}

/// Adapter behind `POST <url>`.
#[derive(Clone)]
pub struct HttpBridge {
    client: HttpClient,
}

impl HttpBridge {
    /// `url` is the full endpoint, e.g. `http://127.0.0.1:8080/pin`.
    pub fn new(url: impl Into<String>) -> Self {
        Self { client: HttpClient::new(url) }
    }
}

impl Bridge for HttpBridge {
    fn call(&self, req: &AdapterRequest) -> Result<Value, BridgeError> {
        self.client.post_json("", req).map_err(|e| match e {
            HttpError::Unreachable { reason, .. } => BridgeError::Unreachable(reason),
            HttpError::Status { status, body, .. } => BridgeError::Rejected { status, message: body },
            HttpError::Malformed { reason, .. } => BridgeError::Malformed(reason),
        })
    }
}
