use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::clock::Tick;
use crate::contracts::RequestId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Pending,
    Success,
    Errored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRun {
    pub run_id: u64,
    pub job_id: String,
    #[serde(default)]
    pub request_id: Option<RequestId>,
    pub status: RunStatus,
    /// Data the pipeline started from.
    pub input: Map<String, Value>,
    pub step_outputs: Vec<Value>,
    #[serde(default)]
    pub error: Option<String>,
    pub started_at: Tick,
    #[serde(default)]
    pub finished_at: Option<Tick>,
}

impl JobRun {
    pub fn new(run_id: u64, job_id: &str, request_id: Option<RequestId>, input: Map<String, Value>, now: Tick) -> Self {
        Self {
            run_id,
            job_id: job_id.into(),
            request_id,
            status: RunStatus::Pending,
            input,
            step_outputs: Vec::new(),
            error: None,
            started_at: now,
            finished_at: None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.status != RunStatus::Pending
    }

    pub(crate) fn succeed(&mut self, now: Tick) {
        debug_assert_eq!(self.status, RunStatus::Pending);
        self.status = RunStatus::Success;
        self.finished_at = Some(now);
    }

    pub(crate) fn fail(&mut self, error: String, now: Tick) {
        debug_assert_eq!(self.status, RunStatus::Pending);
        self.status = RunStatus::Errored;
        self.error = Some(error);
        self.finished_at = Some(now);
    }

    /// Output of the final step, if the run got that far.
    pub fn last_output(&self) -> Option<&Value> {
        self.step_outputs.last()
    }
}
