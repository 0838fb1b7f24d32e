use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::cursor::{CursorStore, EventCursor};
use super::job::{InvalidSpec, JobSpec, TaskStep, Trigger};
use super::run::JobRun;
use super::schedule::CronSchedule;
use crate::adapters::{AdapterRequest, Bridge};
use crate::clock::{Clock, Tick};
use crate::contracts::{RequestId, ORACLE_REQUEST_TOPIC};
use crate::ledger::{Address, Event, EventFilter, LedgerClient, LedgerError, TxStatus};
use crate::slicing::SliceSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSettings {
    /// Account the node signs fulfill transactions with.
    pub node_address: Address,
    /// Oracle contract whose requests the node serves.
    pub oracle_address: Address,
}

#[derive(Debug, thiserror::Error)]
pub enum NodeError {
    #[error("job {0:?} is already registered")]
    DuplicateJob(String),
    #[error(transparent)]
    InvalidSpec(#[from] InvalidSpec),
    #[error("unknown job {0:?}")]
    UnknownJob(String),
    #[error("unknown run {0}")]
    UnknownRun(u64),
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
    #[error("cursor store: {0}")]
    Cursor(#[from] io::Error),
}

struct Job {
    spec: JobSpec,
    schedule: Option<CronSchedule>,
}

struct StepError {
    message: String,
    /// Set when the ledger itself could not be reached.
    ledger_down: Option<LedgerError>,
}

impl StepError {
    fn new(message: impl Into<String>) -> Self {
        Self { message: message.into(), ledger_down: None }
    }

    fn ledger(context: &str, e: LedgerError) -> Self {
        let message = format!("{context}: {e}");
        let ledger_down = matches!(e, LedgerError::Unavailable { .. }).then_some(e);
        Self { message, ledger_down }
    }
}

/// Off-chain oracle node: watches the oracle contract for requests, runs
/// job pipelines and fulfills on-chain; also drives cron jobs.
pub struct OracleNode {
    settings: NodeSettings,
    ledger: Arc<dyn LedgerClient>,
    clock: Arc<dyn Clock>,
    cursor: Arc<dyn CursorStore>,
    slices: Option<Arc<dyn SliceSource>>,
    bridges: BTreeMap<String, Arc<dyn Bridge>>,
    jobs: BTreeMap<String, Job>,
    runs: Vec<JobRun>,
    last_tick: Option<Tick>,
}

impl OracleNode {
    pub fn new(
        settings: NodeSettings,
        ledger: Arc<dyn LedgerClient>,
        clock: Arc<dyn Clock>,
        cursor: Arc<dyn CursorStore>,
    ) -> Self {
        Self {
            settings,
            ledger,
            clock,
            cursor,
            slices: None,
            bridges: BTreeMap::new(),
            jobs: BTreeMap::new(),
            runs: Vec::new(),
            last_tick: None,
        }
    }

    pub fn with_bridge(mut self, name: impl Into<String>, bridge: Arc<dyn Bridge>) -> Self {
        self.bridges.insert(name.into(), bridge);
        self
    }

    /// Source used by `http_get` steps.
    pub fn with_slice_source(mut self, source: Arc<dyn SliceSource>) -> Self {
        self.slices = Some(source);
        self
    }

    pub fn settings(&self) -> &NodeSettings {
        &self.settings
    }

    pub fn register_job(&mut self, spec: JobSpec) -> Result<String, NodeError> {
        if self.jobs.contains_key(&spec.job_id) {
            return Err(NodeError::DuplicateJob(spec.job_id));
        }
        let names: BTreeSet<String> = self.bridges.keys().cloned().collect();
        spec.validate(&names)?;
        let schedule = match spec.trigger {
            Trigger::Cron { interval_ticks } => Some(CronSchedule::new(interval_ticks, self.clock.now())),
            Trigger::Event { .. } => None,
        };
        let id = spec.job_id.clone();
        tracing::info!(job_id = %id, "job registered");
        self.jobs.insert(id.clone(), Job { spec, schedule });
        Ok(id)
    }

    pub fn jobs(&self) -> Vec<JobSpec> {
        self.jobs.values().map(|j| j.spec.clone()).collect()
    }

    pub fn schedule(&self, job_id: &str) -> Option<&CronSchedule> {
        self.jobs.get(job_id).and_then(|j| j.schedule.as_ref())
    }

    pub fn runs(&self) -> &[JobRun] {
        &self.runs
    }

    pub fn run(&self, run_id: u64) -> Option<&JobRun> {
        self.runs.iter().find(|r| r.run_id == run_id)
    }

    pub fn cursor(&self) -> Result<Option<EventCursor>, NodeError> {
        Ok(self.cursor.load()?)
    }

    /// Handles every `OracleRequest` event after the persisted cursor, one
    /// run per event with a registered job. The cursor moves past an event
    /// only once its run is terminal; if the ledger becomes unreachable the
    /// cursor stays put and the error is returned so the caller can retry.
    pub fn poll_and_dispatch(&mut self) -> Result<Vec<JobRun>, NodeError> {
        let cursor = self.cursor.load()?;
        let filter = EventFilter {
            from_block: cursor.map_or(0, |c| c.block),
            topic: Some(ORACLE_REQUEST_TOPIC.into()),
            emitter: Some(self.settings.oracle_address),
        };
        let events = self.ledger.get_events(&filter)?;
        let mut started = Vec::new();
        for event in events {
            if cursor.is_some_and(|c| c.covers(event.position())) {
                continue;
            }
            match self.event_job(&event) {
                Some(job_id) => {
                    let input: Map<String, Value> = event.data.clone().into_iter().collect();
                    let request_id = event.data.get("request_id").and_then(|v| v.as_str()).and_then(|s| s.parse().ok());
                    let (run, ledger_down) = self.start_run(&job_id, request_id, input, self.clock.now());
                    started.push(run);
                    if let Some(e) = ledger_down {
                        return Err(NodeError::Ledger(e));
                    }
                }
                None => tracing::warn!(
                    job_id = ?event.data.get("job_id"),
                    block = event.block_number,
                    "OracleRequest for an unregistered job, skipping"
                ),
            }
            self.cursor.save(event.position().into())?;
        }
        Ok(started)
    }

    fn event_job(&self, event: &Event) -> Option<String> {
        let job_id = event.data.get("job_id")?.as_str()?;
        let job = self.jobs.get(job_id)?;
        match &job.spec.trigger {
            Trigger::Event { topic } if *topic == event.topic => Some(job_id.to_string()),
            _ => None,
        }
    }

    /// Fires every cron job due at `now`. Ticks that do not advance past the
    /// previous one are ignored.
    pub fn tick(&mut self, now: Tick) -> Vec<JobRun> {
        if self.last_tick.is_some_and(|t| now <= t) {
            return Vec::new();
        }
        self.last_tick = Some(now);
        let due: Vec<String> = self
            .jobs
            .iter_mut()
            .filter_map(|(id, job)| job.schedule.as_mut().is_some_and(|s| s.fire(now)).then(|| id.clone()))
            .collect();
        due.into_iter()
            .map(|id| {
                tracing::debug!(job_id = %id, tick = now, "cron fired");
                self.start_run(&id, None, Map::new(), now).0
            })
            .collect()
    }

    /// Runs a job immediately with the given input.
    pub fn trigger(&mut self, job_id: &str, input: Map<String, Value>) -> Result<JobRun, NodeError> {
        if !self.jobs.contains_key(job_id) {
            return Err(NodeError::UnknownJob(job_id.into()));
        }
        Ok(self.start_run(job_id, None, input, self.clock.now()).0)
    }

    /// Re-executes a finished run from its original input as a new run.
    pub fn retry(&mut self, run_id: u64) -> Result<JobRun, NodeError> {
        let old = self.run(run_id).cloned().ok_or(NodeError::UnknownRun(run_id))?;
        if !self.jobs.contains_key(&old.job_id) {
            return Err(NodeError::UnknownJob(old.job_id));
        }
        Ok(self.start_run(&old.job_id, old.request_id, old.input, self.clock.now()).0)
    }

    fn start_run(
        &mut self,
        job_id: &str,
        request_id: Option<RequestId>,
        input: Map<String, Value>,
        now: Tick,
    ) -> (JobRun, Option<LedgerError>) {
        let run_id = self.runs.len() as u64 + 1;
        let mut run = JobRun::new(run_id, job_id, request_id, input, now);
        let spec = self.jobs[job_id].spec.clone();
        let mut ledger_down = None;
        match self.execute(&spec, &mut run) {
            Ok(()) => run.succeed(self.clock.now().max(now)),
            Err(e) => {
                tracing::warn!(run_id, job_id, error = %e.message, "run errored");
                ledger_down = e.ledger_down;
                run.fail(e.message, self.clock.now().max(now));
            }
        }
        self.runs.push(run.clone());
        (run, ledger_down)
    }

    fn execute(&self, spec: &JobSpec, run: &mut JobRun) -> Result<(), StepError> {
        let mut data = run.input.clone();
        for (i, step) in spec.tasks.iter().enumerate() {
            let out = self.step(step, run, &mut data).map_err(|mut e| {
                e.message = format!("step {i} ({}): {}", step.kind(), e.message);
                e
            })?;
            run.step_outputs.push(out);
        }
        Ok(())
    }

    fn step(&self, step: &TaskStep, run: &JobRun, data: &mut Map<String, Value>) -> Result<Value, StepError> {
        match step {
            TaskStep::HttpGet { path_key, output } => {
                let source = self.slices.as_ref().ok_or_else(|| StepError::new("no slice source configured"))?;
                let path = str_field(data, path_key)?;
                let bytes = source.fetch(&path).map_err(|e| StepError::new(e.to_string()))?;
                let text = Value::String(String::from_utf8_lossy(&bytes).into_owned());
                data.insert(output.clone(), text.clone());
                Ok(text)
            }
            TaskStep::Bridge { name } => {
                let bridge = self.bridges.get(name).ok_or_else(|| StepError::new(format!("unknown bridge {name:?}")))?;
                let mut req = AdapterRequest::new(run.run_id.to_string(), data.clone());
                req.meta.insert("job_id".into(), json!(run.job_id));
                let resp = bridge.call(&req).map_err(|e| StepError::new(e.to_string()))?;
                let Value::Object(fields) = &resp else {
                    return Err(StepError::new(format!("adapter {name} returned a non-object payload")));
                };
                data.extend(fields.clone());
                Ok(resp)
            }
            TaskStep::ContractRead { contract, function, args, output } => {
                let value = self
                    .ledger
                    .call_view(contract, function, args.clone())
                    .map_err(|e| StepError::ledger(function, e))?;
                if value.is_null() {
                    return Err(StepError::new(format!("{function} returned null")));
                }
                data.insert(output.clone(), value.clone());
                Ok(value)
            }
            TaskStep::Compare { left, right, output } => {
                let l = data.get(left).ok_or_else(|| StepError::new(format!("missing data.{left}")))?;
                let r = data.get(right).ok_or_else(|| StepError::new(format!("missing data.{right}")))?;
                let equal = Value::Bool(l == r);
                data.insert(output.clone(), equal.clone());
                Ok(equal)
            }
            TaskStep::SubmitFulfill { fields } => {
                let request_id = run.request_id.ok_or_else(|| StepError::new("run has no request_id"))?;
                let default = ["cid".to_string()];
                let fields = if fields.is_empty() { &default[..] } else { &fields[..] };
                let mut payload = Map::new();
                for f in fields {
                    let v = data.get(f).ok_or_else(|| StepError::new(format!("missing data.{f}")))?;
                    payload.insert(f.clone(), v.clone());
                }
                let receipt = self
                    .ledger
                    .send_call(
                        self.settings.node_address,
                        self.settings.oracle_address,
                        "fulfill",
                        json!({ "request_id": request_id, "data": payload }),
                    )
                    .map_err(|e| StepError::ledger("fulfill", e))?;
                match receipt.status {
                    TxStatus::Success => {
                        tracing::info!(%request_id, tx = %receipt.tx_hash, "fulfilled");
                        Ok(json!({ "tx_hash": receipt.tx_hash, "block_number": receipt.block_number }))
                    }
                    TxStatus::Failed { reason } => Err(StepError::new(format!("fulfill reverted: {reason}"))),
                }
            }
        }
    }
}

fn str_field(data: &Map<String, Value>, key: &str) -> Result<String, StepError> {
    data.get(key)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| StepError::new(format!("missing string data.{key}")))
}
