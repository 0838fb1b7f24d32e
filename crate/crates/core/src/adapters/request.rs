use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::content_store::{Cid, StoreError};
use crate::slicing::{FetchError, PathError, SlicePath};

/// Envelope sent by the node's bridge task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterRequest {
    #[serde(rename = "id", alias = "run_id")]
    pub run_id: String,
    pub data: Map<String, Value>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl AdapterRequest {
    pub fn new(run_id: impl Into<String>, data: Map<String, Value>) -> Self {
        Self { run_id: run_id.into(), data, meta: Map::new() }
    }

    pub fn str_field(&self, key: &str) -> Result<&str, AdapterError> {
        match self.data.get(key) {
            Some(Value::String(s)) => Ok(s),
            Some(other) => Err(AdapterError::BadField { field: key.into(), reason: format!("expected a string, got {other}") }),
            None => Err(AdapterError::MissingField(key.into())),
        }
    }

    /// `data.api_path`, checked against the slice path grammar.
    pub fn api_path(&self) -> Result<SlicePath, AdapterError> {
        Ok(self.str_field("api_path")?.parse()?)
    }

    /// `data.hashIpfs` as a well-formed CID.
    pub fn expected_cid(&self) -> Result<Cid, AdapterError> {
        let text = self.str_field("hashIpfs")?;
        text.parse()
            .map_err(|e| AdapterError::BadField { field: "hashIpfs".into(), reason: format!("{e}") })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("missing data.{0}")]
    MissingField(String),
    #[error("bad data.{field}: {reason}")]
    BadField { field: String, reason: String },
    #[error(transparent)]
    BadPath(#[from] PathError),
    #[error("slice fetch failed: {0}")]
    Fetch(#[from] FetchError),
    #[error("content store: {0}")]
    Store(#[from] StoreError),
}

impl AdapterError {
    /// True when the caller sent a request that can never succeed.
    pub fn is_client_error(&self) -> bool {
        matches!(self, Self::MissingField(_) | Self::BadField { .. } | Self::BadPath(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn accepts_both_id_spellings() {
        let a: AdapterRequest = serde_json::from_value(json!({ "id": "7", "data": {} })).unwrap();
        let b: AdapterRequest = serde_json::from_value(json!({ "run_id": "7", "data": {}, "meta": {} })).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_value(&a).unwrap()["id"], "7");
    }

    #[test]
    fn field_validation() {
        let req: AdapterRequest = serde_json::from_value(json!({
            "id": "1",
            "data": { "api_path": "/api/v1/tenants/x/slices/0x00", "hashIpfs": 5 }
        }))
        .unwrap();
        assert!(matches!(req.api_path(), Err(AdapterError::BadPath(_))));
        assert!(matches!(req.expected_cid(), Err(AdapterError::BadField { .. })));
        let empty = AdapterRequest::new("1", Map::new());
        assert!(matches!(empty.api_path(), Err(AdapterError::MissingField(_))));
        assert!(empty.api_path().unwrap_err().is_client_error());
    }
}
