use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clock::Tick;
use crate::ledger::Address;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Trigger {
    /// Runs once per matching ledger event.
    Event { topic: String },
    /// Runs at every `interval_ticks` boundary after registration.
    Cron { interval_ticks: Tick },
}

fn default_path_key() -> String {
    "api_path".into()
}

fn default_body_key() -> String {
    "body".into()
}

fn default_equal_key() -> String {
    "equal".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "config", rename_all = "snake_case")]
pub enum TaskStep {
    /// GET the slice path found at `data[path_key]`, store the body text at `data[output]`.
    HttpGet {
        #[serde(default = "default_path_key")]
        path_key: String,
        #[serde(default = "default_body_key")]
        output: String,
    },
    /// Call the named external adapter with the running data; an object
    /// response is merged into the data.
    Bridge { name: String },
    /// Read-only contract call; the result lands at `data[output]`.
    ContractRead {
        contract: Address,
        function: String,
        #[serde(default)]
        args: Value,
        output: String,
    },
    /// `data[output] = (data[left] == data[right])`.
    Compare {
        left: String,
        right: String,
        #[serde(default = "default_equal_key")]
        output: String,
    },
    /// Send `oracle.fulfill` with the listed data fields (default `["cid"]`).
    SubmitFulfill {
        #[serde(default)]
        fields: Vec<String>,
    },
}

impl TaskStep {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskStep::HttpGet { .. } => "http_get",
            TaskStep::Bridge { .. } => "bridge",
            TaskStep::ContractRead { .. } => "contract_read",
            TaskStep::Compare { .. } => "compare",
            TaskStep::SubmitFulfill { .. } => "submit_fulfill",
        }
    }

    pub fn bridge(name: &str) -> Self {
        TaskStep::Bridge { name: name.into() }
    }

    pub fn submit_fulfill() -> Self {
        TaskStep::SubmitFulfill { fields: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub job_id: String,
    pub trigger: Trigger,
    pub tasks: Vec<TaskStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid job spec {job_id:?}: {reason}")]
pub struct InvalidSpec {
    pub job_id: String,
    pub reason: String,
}

impl JobSpec {
    pub fn event(job_id: &str, topic: &str, tasks: Vec<TaskStep>) -> Self {
        Self { job_id: job_id.into(), trigger: Trigger::Event { topic: topic.into() }, tasks }
    }

    pub fn cron(job_id: &str, interval_ticks: Tick, tasks: Vec<TaskStep>) -> Self {
        Self { job_id: job_id.into(), trigger: Trigger::Cron { interval_ticks }, tasks }
    }

    /// Structural checks; `bridges` are the adapter names the node knows.
    pub fn validate(&self, bridges: &BTreeSet<String>) -> Result<(), InvalidSpec> {
        let bad = |reason: String| Err(InvalidSpec { job_id: self.job_id.clone(), reason });
        if self.job_id.is_empty() {
            return bad("job_id must not be empty".into());
        }
        if self.tasks.is_empty() {
            return bad("task list is empty".into());
        }
        match &self.trigger {
            Trigger::Cron { interval_ticks: 0 } => return bad("cron interval must be at least 1 tick".into()),
            Trigger::Event { topic } if topic.is_empty() => return bad("event topic must not be empty".into()),
            _ => {}
        }
        let is_event = matches!(self.trigger, Trigger::Event { .. });
        let last = self.tasks.len() - 1;
        for (i, step) in self.tasks.iter().enumerate() {
            match step {
                TaskStep::SubmitFulfill { .. } if !is_event => {
                    return bad("submit_fulfill is only allowed in event-triggered jobs".into())
                }
                TaskStep::SubmitFulfill { .. } if i != last => {
                    return bad("submit_fulfill must be the final step".into())
                }
                TaskStep::Bridge { name } if !bridges.contains(name) => {
                    return bad(format!("unknown bridge {name:?}"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn bridges() -> BTreeSet<String> {
        BTreeSet::from(["ipfs_pin".to_string(), "auditor".to_string()])
    }

    #[test]
    fn reference_pipeline_is_valid() {
        let spec = JobSpec::event(
            "my-bridge-task",
            "OracleRequest",
            vec![TaskStep::bridge("ipfs_pin"), TaskStep::submit_fulfill()],
        );
        spec.validate(&bridges()).unwrap();
    }

    #[test]
    fn invalid_specs() {
        let b = bridges();
        assert!(JobSpec::event("j", "OracleRequest", vec![]).validate(&b).is_err());
        assert!(JobSpec::cron("j", 0, vec![TaskStep::bridge("auditor")]).validate(&b).is_err());
        assert!(JobSpec::cron("j", 10, vec![TaskStep::submit_fulfill()]).validate(&b).is_err());
        assert!(JobSpec::event("j", "OracleRequest", vec![TaskStep::submit_fulfill(), TaskStep::bridge("ipfs_pin")])
            .validate(&b)
            .is_err());
        assert!(JobSpec::event("j", "OracleRequest", vec![TaskStep::bridge("nope")]).validate(&b).is_err());
        assert!(JobSpec::event("", "OracleRequest", vec![TaskStep::bridge("ipfs_pin")]).validate(&b).is_err());
    }

    #[test]
    fn declarative_json_form() {
        let spec: JobSpec = serde_json::from_value(json!({
            "job_id": "audit",
            "trigger": { "type": "cron", "interval_ticks": 10 },
            "tasks": [
                { "kind": "contract_read", "config": {
                    "contract": "0xcbc30a03e9264d305e53ec0688e362773e9d24df",
                    "function": "get_stored_hash", "output": "hashIpfs" } },
                { "kind": "bridge", "config": { "name": "auditor" } },
                { "kind": "submit_fulfill", "config": {} }
            ]
        }))
        .unwrap();
        assert_eq!(spec.tasks[2], TaskStep::submit_fulfill());
        assert_eq!(spec.tasks[0].kind(), "contract_read");
        let round: JobSpec = serde_json::from_value(serde_json::to_value(&spec).unwrap()).unwrap();
        assert_eq!(round, spec);
    }
}
