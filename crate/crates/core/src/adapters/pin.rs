use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::request::{AdapterError, AdapterRequest};
use crate::canonical::canonical_or_raw;
use crate::content_store::{Cid, ObjectStore};
use crate::slicing::SliceSource;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinResponse {
    pub cid: Cid,
}

/// Snapshot path: fetches the slice document, canonicalizes it and pins it.
#[derive(Clone)]
pub struct IpfsPinAdapter {
    source: Arc<dyn SliceSource>,
    store: Arc<dyn ObjectStore>,
}

impl IpfsPinAdapter {
    pub fn new(source: Arc<dyn SliceSource>, store: Arc<dyn ObjectStore>) -> Self {
        Self { source, store }
    }

    pub fn handle(&self, req: &AdapterRequest) -> Result<PinResponse, AdapterError> {
        let path = req.api_path()?;
        let raw = self.source.fetch(&path.to_string())?;
        let cid = self.store.add(&canonical_or_raw(&raw), true)?;
        tracing::info!(api_path = %path, %cid, run_id = %req.run_id, "pinned slice snapshot");
        Ok(PinResponse { cid })
    }
}
