use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adapters::{IntegrityReport, Verdict};
use crate::canonical::to_canonical_string;
use crate::clock::Tick;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub tick: Tick,
    pub component: String,
    pub event: Value,
}

/// Ordered record of a scenario run plus the audit reports it produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    pub reports: Vec<IntegrityReport>,
}

#[derive(Serialize, Deserialize)]
struct FinalLine {
    reports: Vec<IntegrityReport>,
}

impl Transcript {
    pub fn push(&mut self, tick: Tick, component: &str, event: Value) {
        let tick = self.entries.last().map_or(tick, |last| tick.max(last.tick));
        self.entries.push(TranscriptEntry { tick, component: component.into(), event });
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.reports.iter().map(|r| r.verdict).collect()
    }

    /// Audit log lines in emission order.
    pub fn log_lines(&self) -> Vec<String> {
        self.reports.iter().map(IntegrityReport::log_line).collect()
    }

    pub fn entries_for(&self, component: &str) -> impl Iterator<Item = &TranscriptEntry> {
        let component = component.to_string();
        self.entries.iter().filter(move |e| e.component == component)
    }

    /// One canonical JSON object per entry, then a final `{"reports": [...]}` line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&to_canonical_string(e));
            out.push('\n');
        }
        out.push_str(&to_canonical_string(&FinalLine { reports: self.reports.clone() }));
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let mut t = Transcript::default();
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if let Some((last, rest)) = lines.split_last() {
            for line in rest {
                t.entries.push(serde_json::from_str(line)?);
            }
            t.reports = serde_json::from_str::<FinalLine>(last)?.reports;
        }
        Ok(t)
    }
}
