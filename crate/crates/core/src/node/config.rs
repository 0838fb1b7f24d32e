use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cursor::{CursorStore, FileCursor, MemoryCursor};
use super::job::JobSpec;
use super::oracle_node::{NodeError, NodeSettings, OracleNode};
use crate::adapters::HttpBridge;
use crate::clock::Clock;
use crate::ledger::http::HttpLedger;
use crate::ledger::Address;
use crate::slicing::HttpController;

fn default_tick_ms() -> u64 {
    1000
}

fn default_poll_ms() -> u64 {
    200
}

/// Declarative node configuration, read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeConfigFile {
    pub ledger_url: String,
    pub node_address: Address,
    pub oracle_address: Address,
    /// Base URL used by `http_get` steps.
    #[serde(default)]
    pub controller_url: Option<String>,
    /// Adapter name to full endpoint URL.
    #[serde(default)]
    pub bridges: BTreeMap<String, String>,
    #[serde(default)]
    pub jobs: Vec<JobSpec>,
    /// Where the event cursor is persisted; in memory when absent.
    #[serde(default)]
    pub cursor_path: Option<PathBuf>,
    #[serde(default = "default_tick_ms")]
    pub tick_ms: u64,
    #[serde(default = "default_poll_ms")]
    pub poll_ms: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Node(#[from] NodeError),
}

impl NodeConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        serde_json::from_slice(&bytes).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    /// Node wired to remote services over HTTP, with all jobs registered.
    pub fn build(&self, clock: Arc<dyn Clock>) -> Result<OracleNode, ConfigError> {
        let cursor: Arc<dyn CursorStore> = match &self.cursor_path {
            Some(p) => Arc::new(FileCursor::new(p)),
            None => Arc::new(MemoryCursor::new()),
        };
        let settings = NodeSettings { node_address: self.node_address, oracle_address: self.oracle_address };
        let mut node = OracleNode::new(settings, Arc::new(HttpLedger::new(&self.ledger_url)), clock, cursor);
        if let Some(url) = &self.controller_url {
            node = node.with_slice_source(Arc::new(HttpController::new(url)));
        }
        for (name, url) in &self.bridges {
            node = node.with_bridge(name.clone(), Arc::new(HttpBridge::new(url)));
        }
        for job in &self.jobs {
            node.register_job(job.clone())?;
        }
        Ok(node)
    }
}
