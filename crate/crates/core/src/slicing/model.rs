use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_bytes;
use crate::clock::Tick;

pub const API_PREFIX: &str = "/api/v1/tenants";

/// A wireless termination point (virtualized access point).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wtp {
    pub wtp_id: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceConfig {
    pub slice_id: String,
    pub tenant_id: String,
    /// Airtime assigned to the slice, in milliseconds.
    pub quantum_ms: u64,
    pub wtps: Vec<String>,
    pub created_at: Tick,
}

/// Public representation served at the slice path. `created_at` is
/// bookkeeping and stays out of the hashed document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceDocument {
    pub slice_id: String,
    pub tenant_id: String,
    pub quantum_ms: u64,
    pub wtps: Vec<String>,
}

impl SliceConfig {
    pub fn document(&self) -> SliceDocument {
        SliceDocument {
            slice_id: self.slice_id.clone(),
            tenant_id: self.tenant_id.clone(),
            quantum_ms: self.quantum_ms,
            wtps: self.wtps.clone(),
        }
    }

    /// Canonical JSON bytes of the public document.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        to_canonical_bytes(&self.document())
    }

    pub fn path(&self) -> SlicePath {
        SlicePath { tenant_id: self.tenant_id.clone(), slice_id: self.slice_id.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tenant {
    pub tenant_id: String,
    pub name: String,
    #[serde(default)]
    pub slices: BTreeMap<String, SliceConfig>,
}

/// True for `0x` followed by exactly two lowercase hex digits.
pub fn is_valid_slice_id(s: &str) -> bool {
    s.len() == 4
        && s.starts_with("0x")
        && s[2..].bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// True for a lowercase hyphenated RFC-4122 UUID.
pub fn is_valid_tenant_id(s: &str) -> bool {
    s.len() == 36
        && uuid::Uuid::parse_str(s).is_ok_and(|u| u.hyphenated().to_string() == s)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a slice path: {0:?} (expected {API_PREFIX}/<uuid>/slices/0x<hh>)")]
pub struct PathError(pub String);

/// `/api/v1/tenants/{tenant_id}/slices/{slice_id}`, the only address of a slice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlicePath {
    pub tenant_id: String,
    pub slice_id: String,
}

impl SlicePath {
    pub fn new(tenant_id: impl Into<String>, slice_id: impl Into<String>) -> Self {
        Self { tenant_id: tenant_id.into(), slice_id: slice_id.into() }
    }
}

impl FromStr for SlicePath {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PathError(s.to_string());
        let rest = s.strip_prefix(API_PREFIX).and_then(|r| r.strip_prefix('/')).ok_or_else(err)?;
        let parts: Vec<&str> = rest.split('/').collect();
        match parts.as_slice() {
            [tid, "slices", sid] if is_valid_tenant_id(tid) && is_valid_slice_id(sid) => {
                Ok(Self::new(*tid, *sid))
            }
            _ => Err(err()),
        }
    }
}

impl fmt::Display for SlicePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{API_PREFIX}/{}/slices/{}", self.tenant_id, self.slice_id)
    }
}
