use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::config::{ConfigError, Mode, ScenarioConfig};
use super::live::LiveStack;
use super::stack::{audit_job, deploy, snapshot_job, Deployment, LocalStack};
use super::transcript::Transcript;
use crate::adapters::{AuditRecord, Verdict};
use crate::clock::{Clock, WallClock};
use crate::content_store::Cid;
use crate::contracts::RequestId;
use crate::ledger::{Address, LedgerClient, LedgerConfig};
use crate::node::{JobRun, MemoryCursor, NodeRunner, OracleNode};
use crate::slicing::{ControllerApi, SlicePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Boot,
    Tenant,
    Deploy,
    Fund,
    RegisterJobs,
    RequestSnapshot,
    Fulfill,
    AuditVerified,
    Tamper,
    AuditCorrupted,
    Shutdown,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Validate => "validate",
            Stage::Boot => "boot",
            Stage::Tenant => "tenant",
            Stage::Deploy => "deploy",
            Stage::Fund => "fund",
            Stage::RegisterJobs => "register_jobs",
            Stage::RequestSnapshot => "request_snapshot",
            Stage::Fulfill => "fulfill",
            Stage::AuditVerified => "audit_verified",
            Stage::Tamper => "tamper",
            Stage::AuditCorrupted => "audit_corrupted",
            Stage::Shutdown => "shutdown",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("scenario failed at stage {stage}: {message}")]
pub struct ScenarioError {
    pub stage: Stage,
    pub message: String,
    /// Everything recorded before the failure.
    pub transcript: Box<Transcript>,
}

impl From<ConfigError> for ScenarioError {
    fn from(e: ConfigError) -> Self {
        ScenarioError { stage: Stage::Validate, message: e.0, transcript: Box::default() }
    }
}

/// Runs the snapshot / audit / tamper / audit use case end to end.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Transcript, ScenarioError> {
    run_scenario_in(config, None)
}

/// [`run_scenario`], additionally leaving state under `state_dir`:
/// `chain.json` (ledger snapshot) and `transcript.jsonl` in both modes, plus
/// `controller/` and `store/` in deterministic mode. The directory should
/// not already hold a run with the same tenant.
pub fn run_scenario_in(config: &ScenarioConfig, state_dir: Option<&Path>) -> Result<Transcript, ScenarioError> {
    config.validate()?;
    match config.mode {
        Mode::Deterministic => run_deterministic(config, state_dir),
        Mode::Live => run_live(config, state_dir),
    }
}

fn write_state(s: &Session<'_>, dir: Option<&Path>) -> Result<(), ScenarioError> {
    let Some(dir) = dir else { return Ok(()) };
    let chain = s.ledger.snapshot().map_err(|e| s.fail(Stage::Shutdown, e))?;
    let io = |e: std::io::Error| s.fail(Stage::Shutdown, e);
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(CHAIN_FILE), serde_json::to_vec_pretty(&chain).expect("chain serializes")).map_err(io)?;
    std::fs::write(dir.join(TRANSCRIPT_FILE), s.transcript.to_jsonl()).map_err(io)?;
    Ok(())
}

pub const CHAIN_FILE: &str = "chain.json";
pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";

/// Mode-independent part of a run: clients, clock and the transcript.
struct Session<'a> {
    config: &'a ScenarioConfig,
    clock: Arc<dyn Clock>,
    ledger: Arc<dyn LedgerClient>,
    controller: Arc<dyn ControllerApi>,
    treasury: Address,
    transcript: Transcript,
    audits_seen: usize,
    runs_seen: usize,
}

impl Session<'_> {
    fn record(&mut self, component: &str, event: Value) {
        let now = self.clock.now();
        self.transcript.push(now, component, event);
    }

    fn fail(&self, stage: Stage, message: impl fmt::Display) -> ScenarioError {
        ScenarioError { stage, message: message.to_string(), transcript: Box::new(self.transcript.clone()) }
    }

    fn boot(&mut self) {
        let config = serde_json::to_value(self.config).expect("config serializes");
        self.record("harness", json!({ "kind": "boot", "config": config }));
    }

    fn tenant_and_slice(&mut self) -> Result<SlicePath, ScenarioError> {
        let c = self.config;
        let tenant = self
            .controller
            .create_tenant(&c.tenant_name, Some(&c.tenant_id))
            .map_err(|e| self.fail(Stage::Tenant, e))?;
        self.record("controller", json!({ "kind": "tenant_created", "tenant_id": tenant.tenant_id, "name": tenant.name }));
        let slice = self
            .controller
            .create_slice(&c.tenant_id, &c.slice_id, c.quantum_initial, Vec::new())
            .map_err(|e| self.fail(Stage::Tenant, e))?;
        let path = slice.path();
        self.record(
            "controller",
            json!({
                "kind": "slice_created",
                "api_path": path.to_string(),
                "quantum_ms": slice.quantum_ms,
                "cid": Cid::of(&slice.canonical_bytes()),
            }),
        );
        Ok(path)
    }

    fn deploy(&mut self, path: &SlicePath) -> Result<Deployment, ScenarioError> {
        let dep = deploy(&*self.ledger, self.treasury, path, self.config.payment_link, 0)
            .map_err(|e| self.fail(Stage::Deploy, e))?;
        self.record(
            "ledger",
            json!({
                "kind": "deployed",
                "link": dep.link,
                "oracle": dep.oracle,
                "validator": dep.validator,
                "node": dep.node,
            }),
        );
        Ok(dep)
    }

    fn fund(&mut self, dep: &Deployment) -> Result<(), ScenarioError> {
        let amount = self.config.funding_link;
        self.ledger
            .execute(dep.admin, dep.link, "transfer", json!({ "to": dep.validator, "amount": amount }))
            .map_err(|e| self.fail(Stage::Fund, e))?;
        self.record("ledger", json!({ "kind": "funded", "validator": dep.validator, "amount": amount }));
        Ok(())
    }

    fn register_jobs(&mut self, node: &mut OracleNode, dep: &Deployment) -> Result<(), ScenarioError> {
        for spec in [snapshot_job(), audit_job(dep.validator, self.config.cron_interval_ticks)] {
            let id = node.register_job(spec).map_err(|e| self.fail(Stage::RegisterJobs, e))?;
            self.record("node", json!({ "kind": "job_registered", "job_id": id }));
        }
        Ok(())
    }

    fn request_snapshot(&mut self, dep: &Deployment) -> Result<RequestId, ScenarioError> {
        let receipt = self
            .ledger
            .execute(dep.admin, dep.validator, "request_snapshot", json!({}))
            .map_err(|e| self.fail(Stage::RequestSnapshot, e))?;
        let request_id: RequestId =
            serde_json::from_value(receipt.output.clone()).map_err(|e| self.fail(Stage::RequestSnapshot, e))?;
        self.record(
            "ledger",
            json!({ "kind": "snapshot_requested", "request_id": request_id, "block": receipt.block_number }),
        );
        Ok(request_id)
    }

    fn stored_hash(&self, dep: &Deployment) -> Option<String> {
        self.ledger
            .call_view(&dep.validator, "get_stored_hash", json!({}))
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
    }

    fn record_runs(&mut self, runs: &[JobRun]) {
        for run in runs.iter().skip(self.runs_seen) {
            let mut event = json!({
                "kind": "run",
                "run_id": run.run_id,
                "job_id": run.job_id,
                "status": run.status,
            });
            if let Some(id) = run.request_id {
                event["request_id"] = json!(id);
            }
            if let Some(e) = &run.error {
                event["error"] = json!(e);
            }
            self.transcript.push(run.finished_at.unwrap_or(run.started_at), "node", event);
        }
        self.runs_seen = self.runs_seen.max(runs.len());
    }

    fn record_audits(&mut self, records: &[AuditRecord]) {
        for r in records.iter().skip(self.audits_seen) {
            self.transcript.push(
                r.report.checked_at,
                "auditor",
                json!({ "kind": "audit", "line": r.line, "report": r.report }),
            );
            self.transcript.reports.push(r.report.clone());
        }
        self.audits_seen = self.audits_seen.max(records.len());
    }

    fn hash_stored(&mut self, dep: &Deployment) -> Result<(), ScenarioError> {
        let cid = self
            .stored_hash(dep)
            .ok_or_else(|| self.fail(Stage::Fulfill, "validator has no stored hash after fulfillment"))?;
        self.record("ledger", json!({ "kind": "hash_stored", "cid": cid }));
        Ok(())
    }

    fn tamper(&mut self, path: &SlicePath) -> Result<(), ScenarioError> {
        let q = self.config.quantum_tampered;
        let slice = self
            .controller
            .update_quantum(&path.tenant_id, &path.slice_id, q)
            .map_err(|e| self.fail(Stage::Tamper, e))?;
        self.record(
            "controller",
            json!({
                "kind": "quantum_updated",
                "api_path": path.to_string(),
                "quantum_ms": q,
                "cid": Cid::of(&slice.canonical_bytes()),
            }),
        );
        Ok(())
    }

    fn expect_verdicts(&self, stage: Stage, expected: &[Verdict]) -> Result<(), ScenarioError> {
        let got = self.transcript.verdicts();
        if got != expected {
            return Err(self.fail(stage, format!("expected verdicts {expected:?}, got {got:?}")));
        }
        Ok(())
    }

    fn shutdown(&mut self) {
        let verdicts = self.transcript.verdicts();
        self.record("harness", json!({ "kind": "shutdown", "verdicts": verdicts }));
    }
}

fn run_deterministic(config: &ScenarioConfig, state_dir: Option<&Path>) -> Result<Transcript, ScenarioError> {
    let ledger_config = LedgerConfig { initial_supply: config.initial_supply, treasury_seed: 0 };
    let stack = match state_dir {
        Some(dir) => LocalStack::open(ledger_config, dir).map_err(|e| ScenarioError {
            stage: Stage::Boot,
            message: e.to_string(),
            transcript: Box::default(),
        })?,
        None => LocalStack::new(ledger_config),
    };
    let mut s = Session {
        config,
        clock: stack.clock.clone(),
        ledger: Arc::new(stack.ledger.clone()),
        controller: Arc::new(stack.api.clone()),
        treasury: stack.treasury(),
        transcript: Transcript::default(),
        audits_seen: 0,
        runs_seen: 0,
    };
    s.boot();
    let path = s.tenant_and_slice()?;
    let dep = s.deploy(&path)?;
    s.fund(&dep)?;
    let mut node = stack.node(dep.node_settings(), Arc::new(MemoryCursor::new()));
    s.register_jobs(&mut node, &dep)?;
    s.request_snapshot(&dep)?;

    node.poll_and_dispatch().map_err(|e| s.fail(Stage::Fulfill, e))?;
    s.record_runs(node.runs());
    s.hash_stored(&dep)?;

    let interval = config.cron_interval_ticks;
    let tamper_at = interval + (interval / 2).max(1);
    for t in 1..=2 * interval {
        stack.clock.advance_to(t);
        if t == tamper_at {
            s.tamper(&path)?;
        }
        node.poll_and_dispatch().map_err(|e| s.fail(Stage::AuditCorrupted, e))?;
        node.tick(t);
        s.record_runs(node.runs());
        s.record_audits(&stack.log.records());
        if t == interval {
            s.expect_verdicts(Stage::AuditVerified, &[Verdict::Verified])?;
        }
    }
    s.expect_verdicts(Stage::AuditCorrupted, &[Verdict::Verified, Verdict::Corrupted])?;
    s.shutdown();
    write_state(&s, state_dir)?;
    Ok(s.transcript)
}

fn wait_for<T>(deadline: Instant, mut probe: impl FnMut() -> Option<T>) -> Option<T> {
    loop {
        if let Some(v) = probe() {
            return Some(v);
        }
        if Instant::now() >= deadline {
            return None;
        }
        std::thread::sleep(Duration::from_millis(10));
    }
}

fn run_live(config: &ScenarioConfig, state_dir: Option<&Path>) -> Result<Transcript, ScenarioError> {
    let tick = Duration::from_millis(config.tick_ms);
    let clock: Arc<dyn Clock> = Arc::new(WallClock::new(tick));
    let ledger_config = LedgerConfig { initial_supply: config.initial_supply, treasury_seed: 0 };
    let boot_err = |e: std::io::Error| ScenarioError {
        stage: Stage::Boot,
        message: e.to_string(),
        transcript: Box::default(),
    };
    let stack = LiveStack::start(ledger_config, clock.clone()).map_err(boot_err)?;
    let mut s = Session {
        config,
        clock: clock.clone(),
        ledger: Arc::new(stack.ledger_client()),
        controller: Arc::new(stack.controller_client()),
        treasury: stack.treasury,
        transcript: Transcript::default(),
        audits_seen: 0,
        runs_seen: 0,
    };
    s.boot();
    let path = s.tenant_and_slice()?;
    let dep = s.deploy(&path)?;
    s.fund(&dep)?;
    let mut node = stack.node(dep.node_settings(), Arc::new(MemoryCursor::new()), clock.clone());
    s.register_jobs(&mut node, &dep)?;
    s.request_snapshot(&dep)?;

    let node = Arc::new(Mutex::new(node));
    let runner = NodeRunner::spawn(node.clone(), clock.clone(), tick.min(Duration::from_millis(20)));
    let patience = tick * (config.cron_interval_ticks as u32) * 2 + Duration::from_secs(10);

    let stored = wait_for(Instant::now() + patience, || s.stored_hash(&dep));
    s.record_runs(node.lock().unwrap().runs());
    if stored.is_none() {
        return Err(s.fail(Stage::Fulfill, "no fulfillment observed in time"));
    }
    s.hash_stored(&dep)?;

    let first = wait_for(Instant::now() + patience, || stack.audits().ok().filter(|a| !a.is_empty()));
    let first = first.ok_or_else(|| s.fail(Stage::AuditVerified, "no audit observed in time"))?;
    s.record_audits(&first[..1]);
    s.expect_verdicts(Stage::AuditVerified, &[Verdict::Verified])?;

    s.tamper(&path)?;
    let both = wait_for(Instant::now() + patience, || stack.audits().ok().filter(|a| a.len() >= 2));
    let both = both.ok_or_else(|| s.fail(Stage::AuditCorrupted, "no second audit observed in time"))?;
    s.record_audits(&both[..2]);
    runner.stop();
    s.record_runs(node.lock().unwrap().runs());
    s.expect_verdicts(Stage::AuditCorrupted, &[Verdict::Verified, Verdict::Corrupted])?;
    s.shutdown();
    write_state(&s, state_dir)?;
    stack.shutdown();
    Ok(s.transcript)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_flips_verdict() {
        let t = run_scenario(&ScenarioConfig::default()).unwrap();
        assert_eq!(t.verdicts(), vec![Verdict::Verified, Verdict::Corrupted]);
        let ticks: Vec<u64> = t.reports.iter().map(|r| r.checked_at).collect();
        assert_eq!(ticks, vec![10, 20]);
        assert!(t.entries.windows(2).all(|w| w[0].tick <= w[1].tick));
    }

    #[test]
    fn rejects_equal_quanta() {
        let cfg = ScenarioConfig { quantum_tampered: 100, ..Default::default() };
        let err = run_scenario(&cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Validate);
    }

    #[test]
    fn interval_of_one_tick() {
        let cfg = ScenarioConfig { cron_interval_ticks: 1, ..Default::default() };
        let t = run_scenario(&cfg).unwrap();
        assert_eq!(t.verdicts(), vec![Verdict::Verified, Verdict::Corrupted]);
    }

    #[test]
    fn underfunded_validator_fails_at_request() {
        let cfg = ScenarioConfig { payment_link: 5, funding_link: 5, ..Default::default() };
        run_scenario(&cfg).unwrap();
        let cfg = ScenarioConfig { payment_link: 20, funding_link: 10, ..Default::default() };
        assert_eq!(run_scenario(&cfg).unwrap_err().stage, Stage::Validate);
    }
}
