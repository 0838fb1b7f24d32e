//! External adapters: pinning slice snapshots into the content store and
//! auditing live slice documents against the anchored CID.

pub mod auditor;
pub mod bridge;
pub mod http;
pub mod pin;
pub mod request;

pub use auditor::{
    AuditRecord, AuditSink, AuditorAdapter, IntegrityReport, MemoryAuditLog, StdoutAuditLog, TeeAuditSink, Verdict,
};
pub use bridge::{Bridge, BridgeError, HttpBridge, LocalBridge};
pub use http::{router, AdapterService};
pub use pin::{IpfsPinAdapter, PinResponse};
pub use request::{AdapterError, AdapterRequest};
