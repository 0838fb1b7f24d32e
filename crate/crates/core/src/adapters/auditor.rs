use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::request::{AdapterError, AdapterRequest};
use crate::canonical::canonical_or_raw;
use crate::clock::{Clock, Tick};
use crate::content_store::Cid;
use crate::slicing::{SlicePath, SliceSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Verified,
    Corrupted,
    Unavailable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "VERIFIED",
            Verdict::Corrupted => "CORRUPTED",
            Verdict::Unavailable => "UNAVAILABLE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub api_path: String,
    pub expected_cid: Cid,
    /// Empty when the fetch failed.
    pub actual_cid: String,
    pub verdict: Verdict,
    pub checked_at: Tick,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl IntegrityReport {
    /// The single human-readable line emitted per audit.
    pub fn log_line(&self) -> String {
        match self.verdict {
            Verdict::Verified => format!("SUCCESS: Rota: {} verificada!", self.api_path),
            Verdict::Corrupted => format!("ERROR: Rota: {} corrompida!", self.api_path),
            Verdict::Unavailable => format!("WARN: Rota: {} indisponivel!", self.api_path),
        }
    }
}

/// One emitted audit: the log line plus the structured record behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub line: String,
    pub report: IntegrityReport,
}

pub trait AuditSink: Send + Sync {
    fn record(&self, record: AuditRecord);
}

/// Keeps every record in memory, in emission order.
#[derive(Default, Clone)]
pub struct MemoryAuditLog {
    records: Arc<Mutex<Vec<AuditRecord>>>,
}

impl MemoryAuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> Vec<AuditRecord> {
        self.records.lock().unwrap().clone()
    }

    pub fn lines(&self) -> Vec<String> {
        self.records.lock().unwrap().iter().map(|r| r.line.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.records.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl AuditSink for MemoryAuditLog {
    fn record(&self, record: AuditRecord) {
        self.records.lock().unwrap().push(record);
    }
}

/// Prints the log line to stdout and the structured record through `tracing`.
#[derive(Default, Clone, Copy)]
pub struct StdoutAuditLog;

impl AuditSink for StdoutAuditLog {
    fn record(&self, record: AuditRecord) {
        println!("{}", record.line);
        let r = &record.report;
        tracing::info!(
            api_path = %r.api_path,
            expected_cid = %r.expected_cid,
            actual_cid = %r.actual_cid,
            verdict = %r.verdict,
            checked_at = r.checked_at,
            "audit"
        );
    }
}

/// Fans records out to several sinks.
pub struct TeeAuditSink(pub Vec<Arc<dyn AuditSink>>);

impl AuditSink for TeeAuditSink {
    fn record(&self, record: AuditRecord) {
        for sink in &self.0 {
            sink.record(record.clone());
        }
    }
}

/// Verification path: recomputes the CID of the live document and compares
/// it with the anchored one.
#[derive(Clone)]
pub struct AuditorAdapter {
    source: Arc<dyn SliceSource>,
    sink: Arc<dyn AuditSink>,
    clock: Arc<dyn Clock>,
}

impl AuditorAdapter {
    pub fn new(source: Arc<dyn SliceSource>, sink: Arc<dyn AuditSink>, clock: Arc<dyn Clock>) -> Self {
        Self { source, sink, clock }
    }

    pub fn handle(&self, req: &AdapterRequest) -> Result<IntegrityReport, AdapterError> {
        let path = req.api_path()?;
        let expected = req.expected_cid()?;
        Ok(self.audit(&path, &expected))
    }

    pub fn audit(&self, path: &SlicePath, expected: &Cid) -> IntegrityReport {
        let api_path = path.to_string();
        let checked_at = self.clock.now();
        let report = match self.source.fetch(&api_path) {
            Ok(raw) => {
                let actual = Cid::of(&canonical_or_raw(&raw));
                let verdict = if &actual == expected { Verdict::Verified } else { Verdict::Corrupted };
                IntegrityReport {
                    api_path,
                    expected_cid: expected.clone(),
                    actual_cid: actual.to_string(),
                    verdict,
                    checked_at,
                    error: None,
                }
            }
            Err(e) => IntegrityReport {
                api_path,
                expected_cid: expected.clone(),
                actual_cid: String::new(),
                verdict: Verdict::Unavailable,
                checked_at,
                error: Some(e.to_string()),
            },
        };
        self.sink.record(AuditRecord { line: report.log_line(), report: report.clone() });
        report
    }
}
