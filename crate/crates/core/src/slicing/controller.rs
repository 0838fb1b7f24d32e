use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::model::{is_valid_slice_id, is_valid_tenant_id, SliceConfig, SlicePath, Tenant, Wtp};
use crate::canonical::to_canonical_bytes;
use crate::clock::{Clock, VirtualClock};
use crate::ledger::sha256;

#[derive(Debug, thiserror::Error)]
pub enum ControllerError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0} already exists")]
    Conflict(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("controller unavailable: {0}")]
    Unavailable(String),
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct State {
    tenants: BTreeMap<String, Tenant>,
    wtps: BTreeMap<String, Wtp>,
    /// Tenants created so far; seeds deterministic id generation.
    tenant_counter: u64,
}

/// Tenant and slice registry served by the mock controller API.
///
/// With a state directory, every tenant is persisted as one canonical JSON
/// file (`<tenant_id>.json`) and WTPs in `wtps.json`; reopening yields
/// byte-identical slice documents.
pub struct SlicingController {
    state: RwLock<State>,
    dir: Option<PathBuf>,
    clock: Arc<dyn Clock>,
    id_seed: u64,
}

impl SlicingController {
    pub fn new() -> Self {
        Self::with_clock(Arc::new(VirtualClock::new()))
    }

    pub fn with_clock(clock: Arc<dyn Clock>) -> Self {
        Self { state: RwLock::new(State::default()), dir: None, clock, id_seed: 0 }
    }

    /// Seed for generated tenant ids.
    pub fn with_id_seed(mut self, seed: u64) -> Self {
        self.id_seed = seed;
        self
    }

    pub fn open(dir: impl Into<PathBuf>, clock: Arc<dyn Clock>) -> Result<Self, ControllerError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut state = State::default();
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        for path in entries {
            let bytes = fs::read(&path)?;
            let bad = |e: serde_json::Error| ControllerError::Validation(format!("{}: {e}", path.display()));
            if path.file_name().is_some_and(|n| n == "wtps.json") {
                state.wtps = serde_json::from_slice(&bytes).map_err(bad)?;
            } else {
                let tenant: Tenant = serde_json::from_slice(&bytes).map_err(bad)?;
                state.tenants.insert(tenant.tenant_id.clone(), tenant);
            }
        }
        state.tenant_counter = state.tenants.len() as u64;
        Ok(Self { state: RwLock::new(state), dir: Some(dir), clock, id_seed: 0 })
    }

    fn next_tenant_id(&self, state: &State, name: &str) -> String {
        let mut pre = b"tenant".to_vec();
        pre.extend_from_slice(&self.id_seed.to_be_bytes());
        pre.extend_from_slice(&state.tenant_counter.to_be_bytes());
        pre.extend_from_slice(name.as_bytes());
        let digest = sha256(&pre);
        let mut bytes = [0u8; 16];
        bytes.copy_from_slice(&digest[..16]);
        uuid::Builder::from_random_bytes(bytes).into_uuid().hyphenated().to_string()
    }

    pub fn register_wtp(&self, wtp: Wtp) -> Result<Wtp, ControllerError> {
        if wtp.wtp_id.is_empty() {
            return Err(ControllerError::Validation("wtp_id must not be empty".into()));
        }
        let mut state = self.state.write().unwrap();
        if state.wtps.contains_key(&wtp.wtp_id) {
            return Err(ControllerError::Conflict(format!("wtp {}", wtp.wtp_id)));
        }
        state.wtps.insert(wtp.wtp_id.clone(), wtp.clone());
        self.persist_wtps(&state)?;
        Ok(wtp)
    }

    pub fn wtps(&self) -> Vec<Wtp> {
        self.state.read().unwrap().wtps.values().cloned().collect()
    }

    pub fn create_tenant(&self, name: &str) -> Result<Tenant, ControllerError> {
        self.create_tenant_inner(None, name)
    }

    pub fn create_tenant_with_id(&self, tenant_id: &str, name: &str) -> Result<Tenant, ControllerError> {
        self.create_tenant_inner(Some(tenant_id), name)
    }

    fn create_tenant_inner(&self, tenant_id: Option<&str>, name: &str) -> Result<Tenant, ControllerError> {
        if name.is_empty() {
            return Err(ControllerError::Validation("tenant name must not be empty".into()));
        }
        let mut state = self.state.write().unwrap();
        let tenant_id = match tenant_id {
            Some(id) if is_valid_tenant_id(id) => id.to_string(),
            Some(id) => return Err(ControllerError::Validation(format!("{id:?} is not a lowercase UUID"))),
            None => self.next_tenant_id(&state, name),
        };
        if state.tenants.contains_key(&tenant_id) {
            return Err(ControllerError::Conflict(format!("tenant {tenant_id}")));
        }
        let tenant = Tenant { tenant_id: tenant_id.clone(), name: name.to_string(), slices: BTreeMap::new() };
        state.tenants.insert(tenant_id.clone(), tenant.clone());
        state.tenant_counter += 1;
        self.persist_tenant(&state, &tenant_id)?;
        Ok(tenant)
    }

    pub fn tenant(&self, tenant_id: &str) -> Result<Tenant, ControllerError> {
        self.state
            .read()
            .unwrap()
            .tenants
            .get(tenant_id)
            .cloned()
            .ok_or_else(|| ControllerError::NotFound(format!("tenant {tenant_id}")))
    }

    pub fn tenants(&self) -> Vec<Tenant> {
        self.state.read().unwrap().tenants.values().cloned().collect()
    }

    pub fn create_slice(
        &self,
        tenant_id: &str,
        slice_id: &str,
        quantum_ms: u64,
        wtps: Vec<String>,
    ) -> Result<SliceConfig, ControllerError> {
        if !is_valid_slice_id(slice_id) {
            return Err(ControllerError::Validation(format!("slice id {slice_id:?} is not 0x<hh>")));
        }
        check_quantum(quantum_ms)?;
        let mut state = self.state.write().unwrap();
        check_wtps(&state, &wtps)?;
        let now = self.clock.now();
        let tenant = state
            .tenants
            .get_mut(tenant_id)
            .ok_or_else(|| ControllerError::NotFound(format!("tenant {tenant_id}")))?;
        if tenant.slices.contains_key(slice_id) {
            return Err(ControllerError::Conflict(format!("slice {slice_id} in tenant {tenant_id}")));
        }
        let slice = SliceConfig {
            slice_id: slice_id.to_string(),
            tenant_id: tenant_id.to_string(),
            quantum_ms,
            wtps,
            created_at: now,
        };
        tenant.slices.insert(slice_id.to_string(), slice.clone());
        self.persist_tenant(&state, tenant_id)?;
        Ok(slice)
    }

    pub fn slice(&self, tenant_id: &str, slice_id: &str) -> Result<SliceConfig, ControllerError> {
        let state = self.state.read().unwrap();
        let tenant = state
            .tenants
            .get(tenant_id)
            .ok_or_else(|| ControllerError::NotFound(format!("tenant {tenant_id}")))?;
        tenant
            .slices
            .get(slice_id)
            .cloned()
            .ok_or_else(|| ControllerError::NotFound(format!("slice {slice_id} in tenant {tenant_id}")))
    }

    /// Canonical JSON document served at the slice's path.
    pub fn get_slice(&self, tenant_id: &str, slice_id: &str) -> Result<Vec<u8>, ControllerError> {
        self.slice(tenant_id, slice_id).map(|s| s.canonical_bytes())
    }

    pub fn get_path(&self, path: &SlicePath) -> Result<Vec<u8>, ControllerError> {
        self.get_slice(&path.tenant_id, &path.slice_id)
    }

    pub fn update_quantum(&self, tenant_id: &str, slice_id: &str, quantum_ms: u64) -> Result<SliceConfig, ControllerError> {
        check_quantum(quantum_ms)?;
        self.mutate_slice(tenant_id, slice_id, |s| s.quantum_ms = quantum_ms)
    }

    pub fn update_wtps(&self, tenant_id: &str, slice_id: &str, wtps: Vec<String>) -> Result<SliceConfig, ControllerError> {
        check_wtps(&self.state.read().unwrap(), &wtps)?;
        self.mutate_slice(tenant_id, slice_id, move |s| s.wtps = wtps)
    }

    fn mutate_slice(
        &self,
        tenant_id: &str,
        slice_id: &str,
        f: impl FnOnce(&mut SliceConfig),
    ) -> Result<SliceConfig, ControllerError> {
        let mut state = self.state.write().unwrap();
        let slice = state
            .tenants
            .get_mut(tenant_id)
            .ok_or_else(|| ControllerError::NotFound(format!("tenant {tenant_id}")))?
            .slices
            .get_mut(slice_id)
            .ok_or_else(|| ControllerError::NotFound(format!("slice {slice_id} in tenant {tenant_id}")))?;
        f(slice);
        let updated = slice.clone();
        self.persist_tenant(&state, tenant_id)?;
        Ok(updated)
    }

    fn persist_tenant(&self, state: &State, tenant_id: &str) -> Result<(), ControllerError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        write_atomic(dir.join(format!("{tenant_id}.json")), &to_canonical_bytes(&state.tenants[tenant_id]))
    }

    fn persist_wtps(&self, state: &State) -> Result<(), ControllerError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        write_atomic(dir.join("wtps.json"), &to_canonical_bytes(&state.wtps))
    }
}

impl Default for SlicingController {
    fn default() -> Self {
        Self::new()
    }
}

fn check_quantum(quantum_ms: u64) -> Result<(), ControllerError> {
    if quantum_ms < 1 {
        return Err(ControllerError::Validation("quantum_ms must be at least 1".into()));
    }
    Ok(())
}

fn check_wtps(state: &State, wtps: &[String]) -> Result<(), ControllerError> {
    for w in wtps {
        if w.is_empty() {
            return Err(ControllerError::Validation("wtp id must not be empty".into()));
        }
        if !state.wtps.contains_key(w) {
            return Err(ControllerError::Validation(format!("unknown wtp {w}")));
        }
    }
    Ok(())
}

fn write_atomic(path: PathBuf, bytes: &[u8]) -> Result<(), ControllerError> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)?;
    Ok(())
}
