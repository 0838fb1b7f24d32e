use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adapters::{AdapterService, AuditorAdapter, IpfsPinAdapter, LocalBridge, MemoryAuditLog};
use crate::clock::{Clock, VirtualClock};
use crate::content_store::{ContentStore, ObjectStore, StoreError};
use crate::contracts::{LINK_TOKEN, ORACLE, VALIDATOR};
use crate::ledger::{Address, Amount, Ledger, LedgerClient, LedgerConfig, LedgerError, LocalLedger};
use crate::node::{CursorStore, JobSpec, NodeSettings, OracleNode, TaskStep};
use crate::slicing::{ControllerError, LocalSliceApi, SlicePath, SliceSource, SlicingController};

pub const SNAPSHOT_JOB: &str = "my-bridge-task";
pub const AUDIT_JOB: &str = "slice-audit";
pub const PIN_BRIDGE: &str = "ipfs_pin";
pub const AUDIT_BRIDGE: &str = "auditor";
pub const NODE_SEED: u64 = 7;

/// `[bridge(ipfs_pin), submit_fulfill]`, triggered by oracle requests.
pub fn snapshot_job() -> JobSpec {
    JobSpec::event(
        SNAPSHOT_JOB,
        crate::contracts::ORACLE_REQUEST_TOPIC,
        vec![TaskStep::bridge(PIN_BRIDGE), TaskStep::submit_fulfill()],
    )
}

/// Cron audit: read the anchored CID and path from the validator, then call
/// the auditor adapter.
pub fn audit_job(validator: Address, interval_ticks: u64) -> JobSpec {
    let read = |function: &str, output: &str| TaskStep::ContractRead {
        contract: validator,
        function: function.into(),
        args: json!({}),
        output: output.into(),
    };
    JobSpec::cron(
        AUDIT_JOB,
        interval_ticks,
        vec![read("get_stored_hash", "hashIpfs"), read("get_api_path", "api_path"), TaskStep::bridge(AUDIT_BRIDGE)],
    )
}

/// Addresses of everything deployed for one monitored slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deployment {
    pub admin: Address,
    pub node: Address,
    pub link: Address,
    pub oracle: Address,
    pub validator: Address,
    pub api_path: String,
}

impl Deployment {
    pub fn node_settings(&self) -> NodeSettings {
        NodeSettings { node_address: self.node, oracle_address: self.oracle }
    }
}

/// Deploys LINK, oracle and validator from the treasury, authorizes the node
/// account and funds the validator.
pub fn deploy(
    ledger: &dyn LedgerClient,
    treasury: Address,
    path: &SlicePath,
    payment: Amount,
    funding: Amount,
) -> Result<Deployment, LedgerError> {
    let node = match ledger.get_account(&Address::for_eoa_seed(NODE_SEED))? {
        Some(a) => a.address,
        None => ledger.create_eoa(NODE_SEED)?,
    };
    let link = ledger.deploy(treasury, LINK_TOKEN, json!({}))?;
    let oracle = ledger.deploy(treasury, ORACLE, json!({ "link_token": link, "min_payment": payment }))?;
    ledger.execute(treasury, oracle, "set_authorization", json!({ "node": node, "allowed": true }))?;
    let api_path = path.to_string();
    let validator = ledger.deploy(
        treasury,
        VALIDATOR,
        json!({ "api_path": api_path, "job_id": SNAPSHOT_JOB, "oracle_address": oracle, "payment": payment }),
    )?;
    if funding > 0 {
        ledger.execute(treasury, link, "transfer", json!({ "to": validator, "amount": funding }))?;
    }
    Ok(Deployment { admin: treasury, node, link, oracle, validator, api_path })
}

#[derive(Debug, thiserror::Error)]
pub enum StackError {
    #[error("controller state: {0}")]
    Controller(#[from] ControllerError),
    #[error("content store state: {0}")]
    Store(#[from] StoreError),
}

/// Every service in one process, wired through in-process interfaces and
/// one virtual clock.
#[derive(Clone)]
pub struct LocalStack {
    pub clock: Arc<VirtualClock>,
    pub ledger: LocalLedger,
    pub api: LocalSliceApi,
    pub store: Arc<ContentStore>,
    pub log: MemoryAuditLog,
}

impl LocalStack {
    pub fn new(config: LedgerConfig) -> Self {
        let clock = Arc::new(VirtualClock::new());
        let ledger = LocalLedger::new(Ledger::standard_with_clock(config, clock.clone()));
        let api = LocalSliceApi::new(Arc::new(SlicingController::with_clock(clock.clone())));
        Self { clock, ledger, api, store: Arc::new(ContentStore::new()), log: MemoryAuditLog::new() }
    }

    /// Like [`new`](Self::new) but the content store and the controller
    /// persist under `dir/store` and `dir/controller`.
    pub fn open(config: LedgerConfig, dir: &Path) -> Result<Self, StackError> {
        let mut stack = Self::new(config);
        let controller = SlicingController::open(dir.join("controller"), stack.clock.clone())?;
        stack.api = LocalSliceApi::new(Arc::new(controller));
        stack.store = Arc::new(ContentStore::open(dir.join("store"), None)?);
        Ok(stack)
    }

    pub fn treasury(&self) -> Address {
        self.ledger.read().treasury()
    }

    pub fn controller(&self) -> &Arc<SlicingController> {
        self.api.controller()
    }

    pub fn pin_adapter(&self) -> IpfsPinAdapter {
        IpfsPinAdapter::new(Arc::new(self.api.clone()), self.store.clone() as Arc<dyn ObjectStore>)
    }

    pub fn auditor(&self) -> AuditorAdapter {
        self.auditor_over(Arc::new(self.api.clone()))
    }

    /// Auditor reading slices from another source (e.g. a tampering one).
    pub fn auditor_over(&self, source: Arc<dyn SliceSource>) -> AuditorAdapter {
        AuditorAdapter::new(source, Arc::new(self.log.clone()), self.clock.clone() as Arc<dyn Clock>)
    }

    pub fn adapter_service(&self) -> AdapterService {
        AdapterService { pin: self.pin_adapter(), auditor: self.auditor(), log: Some(self.log.clone()) }
    }

    /// Node with both bridges wired in-process; no jobs registered.
    pub fn node(&self, settings: NodeSettings, cursor: Arc<dyn CursorStore>) -> OracleNode {
        self.node_with_auditor(settings, cursor, self.auditor())
    }

    pub fn node_with_auditor(
        &self,
        settings: NodeSettings,
        cursor: Arc<dyn CursorStore>,
        auditor: AuditorAdapter,
    ) -> OracleNode {
        OracleNode::new(settings, Arc::new(self.ledger.clone()), self.clock.clone(), cursor)
            .with_slice_source(Arc::new(self.api.clone()))
            .with_bridge(PIN_BRIDGE, Arc::new(LocalBridge::Pin(self.pin_adapter())))
            .with_bridge(AUDIT_BRIDGE, Arc::new(LocalBridge::Audit(auditor)))
    }
}
