use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use super::controller::{ControllerError, SlicingController};
use super::model::{SliceConfig, SlicePath, Tenant, Wtp, API_PREFIX};
use crate::canonical::to_canonical_bytes;
use crate::net::{HttpClient, HttpError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("slice source unavailable: {0}")]
    Unavailable(String),
    #[error(transparent)]
    BadPath(#[from] super::model::PathError),
}

/// Anything that can serve the current bytes of a slice path.
pub trait SliceSource: Send + Sync {
    fn fetch(&self, api_path: &str) -> Result<Vec<u8>, FetchError>;
}

impl<T: SliceSource + ?Sized> SliceSource for Arc<T> {
    fn fetch(&self, api_path: &str) -> Result<Vec<u8>, FetchError> {
        (**self).fetch(api_path)
    }
}

impl SliceSource for SlicingController {
    fn fetch(&self, api_path: &str) -> Result<Vec<u8>, FetchError> {
        let path: SlicePath = api_path.parse()?;
        self.get_path(&path).map_err(|e| match e {
            ControllerError::NotFound(what) => FetchError::NotFound(what),
            other => FetchError::Unavailable(other.to_string()),
        })
    }
}

/// In-process controller whose read API can be switched off.
#[derive(Clone)]
pub struct LocalSliceApi {
    controller: Arc<SlicingController>,
    online: Arc<AtomicBool>,
}

impl LocalSliceApi {
    pub fn new(controller: Arc<SlicingController>) -> Self {
        Self { controller, online: Arc::new(AtomicBool::new(true)) }
    }

    pub fn controller(&self) -> &Arc<SlicingController> {
        &self.controller
    }

    pub fn set_online(&self, online: bool) {
        self.online.store(online, Ordering::SeqCst);
    }

    pub fn is_online(&self) -> bool {
        self.online.load(Ordering::SeqCst)
    }
}

impl SliceSource for LocalSliceApi {
    fn fetch(&self, api_path: &str) -> Result<Vec<u8>, FetchError> {
        if !self.is_online() {
            return Err(FetchError::Unavailable("controller offline".into()));
        }
        self.controller.fetch(api_path)
    }
}

/// Serves a rewritten document: parses what the inner source returns,
/// applies `edit`, re-serializes canonically.
pub struct TamperingSource<S> {
    inner: S,
    edit: Box<dyn Fn(&mut Value) + Send + Sync>,
}

impl<S: SliceSource> TamperingSource<S> {
    pub fn new(inner: S, edit: impl Fn(&mut Value) + Send + Sync + 'static) -> Self {
        Self { inner, edit: Box::new(edit) }
    }

    /// Replaces one top-level field.
    pub fn set_field(inner: S, field: &str, value: Value) -> Self {
        let field = field.to_string();
        Self::new(inner, move |doc| {
            doc[&field] = value.clone();
        })
    }
}

impl<S: SliceSource> SliceSource for TamperingSource<S> {
    fn fetch(&self, api_path: &str) -> Result<Vec<u8>, FetchError> {
        let raw = self.inner.fetch(api_path)?;
        let mut doc: Value = serde_json::from_slice(&raw)
            .map_err(|e| FetchError::Unavailable(format!("tampering a non-JSON body: {e}")))?;
        (self.edit)(&mut doc);
        Ok(to_canonical_bytes(&doc))
    }
}

/// Administrative operations on a controller, local or remote.
pub trait ControllerApi: Send + Sync {
    fn create_tenant(&self, name: &str, tenant_id: Option<&str>) -> Result<Tenant, ControllerError>;
    fn create_slice(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64, wtps: Vec<String>)
        -> Result<SliceConfig, ControllerError>;
    fn update_quantum(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64) -> Result<SliceConfig, ControllerError>;
    fn register_wtp(&self, wtp: Wtp) -> Result<Wtp, ControllerError>;
    fn tenants(&self) -> Result<Vec<Tenant>, ControllerError>;
}

impl ControllerApi for SlicingController {
    fn create_tenant(&self, name: &str, tenant_id: Option<&str>) -> Result<Tenant, ControllerError> {
        match tenant_id {
            Some(id) => self.create_tenant_with_id(id, name),
            None => SlicingController::create_tenant(self, name),
        }
    }

    fn create_slice(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64, wtps: Vec<String>)
        -> Result<SliceConfig, ControllerError> {
        SlicingController::create_slice(self, tenant_id, slice_id, quantum_ms, wtps)
    }

    fn update_quantum(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64) -> Result<SliceConfig, ControllerError> {
        SlicingController::update_quantum(self, tenant_id, slice_id, quantum_ms)
    }

    fn register_wtp(&self, wtp: Wtp) -> Result<Wtp, ControllerError> {
        SlicingController::register_wtp(self, wtp)
    }

    fn tenants(&self) -> Result<Vec<Tenant>, ControllerError> {
        Ok(SlicingController::tenants(self))
    }
}

impl ControllerApi for LocalSliceApi {
    fn create_tenant(&self, name: &str, tenant_id: Option<&str>) -> Result<Tenant, ControllerError> {
        ControllerApi::create_tenant(&*self.controller, name, tenant_id)
    }

    fn create_slice(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64, wtps: Vec<String>)
        -> Result<SliceConfig, ControllerError> {
        self.controller.create_slice(tenant_id, slice_id, quantum_ms, wtps)
    }

    fn update_quantum(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64) -> Result<SliceConfig, ControllerError> {
        self.controller.update_quantum(tenant_id, slice_id, quantum_ms)
    }

    fn register_wtp(&self, wtp: Wtp) -> Result<Wtp, ControllerError> {
        self.controller.register_wtp(wtp)
    }

    fn tenants(&self) -> Result<Vec<Tenant>, ControllerError> {
        Ok(self.controller.tenants())
    }
}

/// Controller reached over its REST API.
#[derive(Clone)]
pub struct HttpController {
    client: HttpClient,
}

impl HttpController {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self { client: HttpClient::new(base_url) }
    }

    pub fn base(&self) -> &str {
        self.client.base()
    }
}

fn remote_error(e: HttpError) -> ControllerError {
    let msg = match &e {
        HttpError::Status { body, .. } => serde_json::from_str::<Value>(body)
            .ok()
            .and_then(|v| v["error"].as_str().map(str::to_string))
            .unwrap_or_else(|| body.clone()),
        _ => e.to_string(),
    };
    match e.status() {
        Some(404) => ControllerError::NotFound(msg),
        Some(409) => ControllerError::Conflict(msg),
        Some(400) | Some(422) => ControllerError::Validation(msg),
        _ => ControllerError::Unavailable(msg),
    }
}

impl SliceSource for HttpController {
    fn fetch(&self, api_path: &str) -> Result<Vec<u8>, FetchError> {
        self.client.get_bytes(api_path).map_err(|e| match e.status() {
            Some(404) => FetchError::NotFound(api_path.to_string()),
            _ => FetchError::Unavailable(e.to_string()),
        })
    }
}

impl ControllerApi for HttpController {
    fn create_tenant(&self, name: &str, tenant_id: Option<&str>) -> Result<Tenant, ControllerError> {
        let body = json!({ "name": name, "tenant_id": tenant_id });
        self.client.post_json(API_PREFIX, &body).map_err(remote_error)
    }

    fn create_slice(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64, wtps: Vec<String>)
        -> Result<SliceConfig, ControllerError> {
        let body = json!({ "slice_id": slice_id, "quantum_ms": quantum_ms, "wtps": wtps });
        self.client
            .post_json(&format!("{API_PREFIX}/{tenant_id}/slices"), &body)
            .map_err(remote_error)
    }

    fn update_quantum(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64) -> Result<SliceConfig, ControllerError> {
        self.client
            .put_json(
                &format!("{API_PREFIX}/{tenant_id}/slices/{slice_id}/quantum"),
                &json!({ "quantum_ms": quantum_ms }),
            )
            .map_err(remote_error)
    }

    fn register_wtp(&self, wtp: Wtp) -> Result<Wtp, ControllerError> {
        self.client.post_json("/api/v1/wtps", &wtp).map_err(remote_error)
    }

    fn tenants(&self) -> Result<Vec<Tenant>, ControllerError> {
        #[derive(Deserialize)]
        struct Listing {
            tenants: Vec<Tenant>,
        }
        let listing: Listing = self.client.get_json(API_PREFIX).map_err(remote_error)?;
        Ok(listing.tenants)
    }
}
