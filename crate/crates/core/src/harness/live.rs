use std::sync::Arc;
use std::time::Duration;

use crate::adapters::{self, AdapterService, AuditRecord, AuditorAdapter, HttpBridge, IpfsPinAdapter, MemoryAuditLog};
use crate::clock::Clock;
use crate::content_store::{self, http::HttpObjectStore, ContentStore};
use crate::ledger::http::HttpLedger;
use crate::ledger::{self, Address, Ledger, LedgerConfig, LocalLedger};
use crate::net::{HttpClient, HttpError, ServerHandle};
use crate::node::{CursorStore, NodeSettings, OracleNode};
use crate::slicing::{self, HttpController, LocalSliceApi, SlicingController};

use super::stack::{AUDIT_BRIDGE, PIN_BRIDGE};

/// Every service behind its own HTTP listener on localhost. Services talk
/// to each other only through their HTTP APIs.
pub struct LiveStack {
    pub ledger: ServerHandle,
    pub controller: ServerHandle,
    pub store: ServerHandle,
    pub adapters: ServerHandle,
    pub treasury: Address,
    /// Switches the controller's API off without stopping its listener.
    pub controller_api: LocalSliceApi,
}

impl LiveStack {
    pub fn start(config: LedgerConfig, clock: Arc<dyn Clock>) -> std::io::Result<Self> {
        let chain = Ledger::standard_with_clock(config, clock.clone());
        let treasury = chain.treasury();
        let ledger = ServerHandle::spawn_local(ledger::http::router(LocalLedger::new(chain), Duration::ZERO))?;

        let controller_api = LocalSliceApi::new(Arc::new(SlicingController::with_clock(clock.clone())));
        let controller = ServerHandle::spawn_local(slicing::router(controller_api.clone()))?;

        let store = ServerHandle::spawn_local(content_store::http::router(Arc::new(ContentStore::new())))?;

        let slices = Arc::new(HttpController::new(controller.url()));
        let log = MemoryAuditLog::new();
        let service = AdapterService {
            pin: IpfsPinAdapter::new(slices.clone(), Arc::new(HttpObjectStore::new(store.url()))),
            auditor: AuditorAdapter::new(slices, Arc::new(log.clone()), clock),
            log: Some(log),
        };
        let adapters = ServerHandle::spawn_local(adapters::router(service))?;
        Ok(Self { ledger, controller, store, adapters, treasury, controller_api })
    }

    pub fn ledger_client(&self) -> HttpLedger {
        HttpLedger::new(self.ledger.url())
    }

    pub fn controller_client(&self) -> HttpController {
        HttpController::new(self.controller.url())
    }

    /// Audit records emitted so far by the adapters service.
    pub fn audits(&self) -> Result<Vec<AuditRecord>, HttpError> {
        HttpClient::new(self.adapters.url()).get_json("/audits")
    }

    /// Node reaching ledger, controller and adapters over HTTP.
    pub fn node(&self, settings: NodeSettings, cursor: Arc<dyn CursorStore>, clock: Arc<dyn Clock>) -> OracleNode {
        OracleNode::new(settings, Arc::new(self.ledger_client()), clock, cursor)
            .with_slice_source(Arc::new(self.controller_client()))
            .with_bridge(PIN_BRIDGE, Arc::new(HttpBridge::new(format!("{}/pin", self.adapters.url()))))
            .with_bridge(AUDIT_BRIDGE, Arc::new(HttpBridge::new(format!("{}/validate", self.adapters.url()))))
    }

    pub fn shutdown(self) {
        self.adapters.shutdown();
        self.store.shutdown();
        self.controller.shutdown();
        self.ledger.shutdown();
    }
}
