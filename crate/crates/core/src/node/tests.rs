use std::sync::{Arc, Mutex};

use serde_json::{json, Map, Value};

use super::*;
use crate::adapters::{AuditorAdapter, Verdict};
use crate::content_store::cid_of;
use crate::harness::{audit_job, deploy, snapshot_job, Deployment, LocalStack, AUDIT_JOB, SNAPSHOT_JOB};
use crate::ledger::{Address, Amount, ChainSnapshot, Event, EventFilter, LedgerClient, LedgerConfig, LedgerError, Receipt, Transaction};
use crate::ledger::{Account, Block};
use crate::slicing::{SlicePath, SliceSource};

const TID: &str = "f7257cce-d05e-4f43-a0a6-f19236948f2f";

struct Fixture {
    stack: LocalStack,
    dep: Deployment,
    cursor: MemoryCursor,
}

fn fixture() -> Fixture {
    let stack = LocalStack::new(LedgerConfig { initial_supply: 1_000, treasury_seed: 0 });
    stack.controller().create_tenant_with_id(TID, "tenant-a").unwrap();
    stack.controller().create_slice(TID, "0x00", 100, vec![]).unwrap();
    let path = SlicePath::new(TID, "0x00");
    let dep = deploy(&stack.ledger, stack.treasury(), &path, 1, 10).unwrap();
    Fixture { stack, dep, cursor: MemoryCursor::new() }
}

impl Fixture {
    fn node(&self) -> OracleNode {
        let mut n = self.stack.node(self.dep.node_settings(), Arc::new(self.cursor.clone()));
        n.register_job(snapshot_job()).unwrap();
        n
    }

    fn request_snapshot(&self) -> Receipt {
        self.stack.ledger.execute(self.dep.admin, self.dep.validator, "request_snapshot", json!({})).unwrap()
    }

    fn stored(&self) -> Value {
        self.stack.ledger.call_view(&self.dep.validator, "get_stored_hash", json!({})).unwrap()
    }

    fn count(&self, topic: &str) -> usize {
        self.stack.ledger.get_events(&EventFilter::topic(0, topic)).unwrap().len()
    }

    fn balance(&self, a: &Address) -> Amount {
        self.stack.ledger.read().balance_of(a)
    }
}

#[test]
fn register_and_list() {
    let f = fixture();
    let mut node = f.node();
    assert_eq!(node.jobs().iter().map(|j| j.job_id.clone()).collect::<Vec<_>>(), vec![SNAPSHOT_JOB]);
    assert!(matches!(node.register_job(snapshot_job()), Err(NodeError::DuplicateJob(_))));
    assert!(matches!(
        node.register_job(JobSpec::event("empty", "OracleRequest", vec![])),
        Err(NodeError::InvalidSpec(_))
    ));
}

#[test]
fn request_is_fulfilled_with_the_pinned_cid() {
    let f = fixture();
    let mut node = f.node();
    f.request_snapshot();
    let runs = node.poll_and_dispatch().unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].status, RunStatus::Success, "{:?}", runs[0].error);
    assert_eq!(runs[0].step_outputs.len(), 2);
    let bytes = f.stack.api.fetch(&f.dep.api_path).unwrap();
    assert_eq!(f.stored(), json!(cid_of(&bytes).to_string()));
    assert_eq!(f.balance(&f.dep.node), 1);
    assert!(node.poll_and_dispatch().unwrap().is_empty());
}

#[test]
fn unregistered_job_is_skipped() {
    let f = fixture();
    let mut node = OracleNode::new(
        f.dep.node_settings(),
        Arc::new(f.stack.ledger.clone()),
        f.stack.clock.clone(),
        Arc::new(f.cursor.clone()),
    );
    f.request_snapshot();
    assert!(node.poll_and_dispatch().unwrap().is_empty());
    assert!(f.cursor.get().is_some());
    assert!(node.runs().is_empty());
}

#[test]
fn adapter_failure_leaves_ledger_untouched() {
    let f = fixture();
    let mut node = f.node();
    f.request_snapshot();
    f.stack.api.set_online(false);
    let before = f.stack.ledger.snapshot().unwrap();
    let runs = node.poll_and_dispatch().unwrap();
    assert_eq!(runs[0].status, RunStatus::Errored);
    assert_eq!(runs[0].step_outputs.len(), 0);
    assert_eq!(f.stack.ledger.snapshot().unwrap(), before);
    assert_eq!(f.stored(), Value::Null);

    // the request stays pending on-chain, so a retry can still fulfill it
    f.stack.api.set_online(true);
    let retried = node.retry(runs[0].run_id).unwrap();
    assert_eq!(retried.status, RunStatus::Success);
    assert!(f.stored().is_string());
}

#[test]
fn replayed_fulfill_reverts() {
    let f = fixture();
    let mut node = f.node();
    f.request_snapshot();
    let first = node.poll_and_dispatch().unwrap().remove(0);
    let stored = f.stored();
    let again = node.retry(first.run_id).unwrap();
    assert_eq!(again.status, RunStatus::Errored);
    assert!(again.error.unwrap().contains("fulfill reverted"));
    assert_eq!(f.stored(), stored);
    assert_eq!(f.count("HashStored"), 1);
    assert_eq!(f.balance(&f.dep.node), 1);
}

#[test]
fn restart_resumes_after_cursor() {
    let f = fixture();
    f.request_snapshot();
    {
        let mut node = f.node();
        assert_eq!(node.poll_and_dispatch().unwrap().len(), 1);
    }
    f.request_snapshot();
    let mut node = f.node();
    let runs = node.poll_and_dispatch().unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].status, RunStatus::Success);
    assert_eq!(f.count("OracleFulfilled"), 2);
}

#[test]
fn lost_cursor_cannot_double_fulfill() {
    let f = fixture();
    f.request_snapshot();
    f.node().poll_and_dispatch().unwrap();
    f.cursor.set(None);
    let runs = f.node().poll_and_dispatch().unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].status, RunStatus::Errored);
    assert_eq!(f.count("HashStored"), 1);
    assert_eq!(f.balance(&f.dep.node), 1);
    assert_eq!(f.stack.ledger.read().total_balance(), 1_000);
}

#[test]
fn cron_fires_on_boundaries() {
    let f = fixture();
    let mut node = f.node();
    f.request_snapshot();
    node.poll_and_dispatch().unwrap();
    node.register_job(audit_job(f.dep.validator, 10)).unwrap();
    let mut fired = Vec::new();
    for t in 0..=35 {
        f.stack.clock.advance_to(t);
        for run in node.tick(t) {
            assert_eq!(run.status, RunStatus::Success, "{:?}", run.error);
            fired.push(run.started_at);
        }
    }
    assert_eq!(fired, vec![10, 20, 30]);
    assert!(node.tick(12).is_empty());
    assert_eq!(f.stack.log.len(), 3);
    let report = node.runs().last().unwrap().last_output().unwrap();
    assert_eq!(report["verdict"], "VERIFIED");
    assert_eq!(node.schedule(AUDIT_JOB).unwrap().last_fired, 30);
}

#[test]
fn cron_jump_coalesces() {
    let f = fixture();
    let mut node = f.node();
    node.register_job(audit_job(f.dep.validator, 10)).unwrap();
    assert_eq!(node.tick(10).len(), 1);
    assert_eq!(node.tick(45).len(), 1);
    assert_eq!(node.tick(46).len(), 0);
}

#[test]
fn cron_audit_before_snapshot_errors() {
    let f = fixture();
    let mut node = f.node();
    node.register_job(audit_job(f.dep.validator, 5)).unwrap();
    let runs = node.tick(5);
    assert_eq!(runs[0].status, RunStatus::Errored);
    assert!(f.stack.log.is_empty());
}

#[test]
fn trigger_runs_a_job_now() {
    let f = fixture();
    let mut node = f.node();
    f.request_snapshot();
    node.poll_and_dispatch().unwrap();
    node.register_job(audit_job(f.dep.validator, 10)).unwrap();
    f.stack.controller().update_quantum(TID, "0x00", 200).unwrap();
    let run = node.trigger(AUDIT_JOB, Map::new()).unwrap();
    assert_eq!(run.last_output().unwrap()["verdict"], json!(Verdict::Corrupted));
    assert!(matches!(node.trigger("nope", Map::new()), Err(NodeError::UnknownJob(_))));
}

#[test]
fn http_get_and_compare_steps() {
    let f = fixture();
    let mut node = f.node();
    let spec = JobSpec::cron(
        "fetch",
        1,
        vec![
            TaskStep::HttpGet { path_key: "api_path".into(), output: "body".into() },
            TaskStep::Compare { left: "body".into(), right: "expected".into(), output: "same".into() },
        ],
    );
    node.register_job(spec).unwrap();
    let body = String::from_utf8(f.stack.api.fetch(&f.dep.api_path).unwrap()).unwrap();
    let mut input = Map::new();
    input.insert("api_path".into(), json!(f.dep.api_path));
    input.insert("expected".into(), json!(body));
    let run = node.trigger("fetch", input).unwrap();
    assert_eq!(run.status, RunStatus::Success);
    assert_eq!(run.step_outputs, vec![json!(body), json!(true)]);
}

/// Ledger that can be switched off, answering `Unavailable`.
struct Flaky {
    inner: crate::ledger::LocalLedger,
    down: Mutex<bool>,
}

impl Flaky {
    fn check(&self) -> Result<(), LedgerError> {
        if *self.down.lock().unwrap() {
            return Err(LedgerError::Unavailable { reason: "switched off".into() });
        }
        Ok(())
    }
}

impl LedgerClient for Flaky {
    fn submit_transaction(&self, tx: Transaction) -> Result<Receipt, LedgerError> {
        self.check()?;
        self.inner.submit_transaction(tx)
    }
    fn get_events(&self, filter: &EventFilter) -> Result<Vec<Event>, LedgerError> {
        self.check()?;
        self.inner.get_events(filter)
    }
    fn get_account(&self, address: &Address) -> Result<Option<Account>, LedgerError> {
        self.check()?;
        self.inner.get_account(address)
    }
    fn get_block(&self, number: u64) -> Result<Option<Block>, LedgerError> {
        self.check()?;
        self.inner.get_block(number)
    }
    fn height(&self) -> Result<u64, LedgerError> {
        self.check()?;
        self.inner.height()
    }
    fn call_view(&self, to: &Address, function: &str, args: Value) -> Result<Value, LedgerError> {
        self.check()?;
        self.inner.call_view(to, function, args)
    }
    fn create_eoa(&self, seed: u64) -> Result<Address, LedgerError> {
        self.check()?;
        self.inner.create_eoa(seed)
    }
    fn snapshot(&self) -> Result<ChainSnapshot, LedgerError> {
        self.check()?;
        self.inner.snapshot()
    }
}

#[test]
fn ledger_outage_keeps_the_cursor() {
    let f = fixture();
    let flaky = Arc::new(Flaky { inner: f.stack.ledger.clone(), down: Mutex::new(true) });
    let mut node = OracleNode::new(f.dep.node_settings(), flaky.clone(), f.stack.clock.clone(), Arc::new(f.cursor.clone()))
        .with_bridge("ipfs_pin", Arc::new(crate::adapters::LocalBridge::Pin(f.stack.pin_adapter())));
    node.register_job(snapshot_job()).unwrap();
    f.request_snapshot();
    assert!(matches!(node.poll_and_dispatch(), Err(NodeError::Ledger(_))));
    assert_eq!(f.cursor.get(), None);
    *flaky.down.lock().unwrap() = false;
    let runs = node.poll_and_dispatch().unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].status, RunStatus::Success);
}

#[test]
fn config_file_round_trip() {
    let f = fixture();
    let cfg = NodeConfigFile {
        ledger_url: "http://127.0.0.1:1".into(),
        node_address: f.dep.node,
        oracle_address: f.dep.oracle,
        controller_url: None,
        bridges: [("ipfs_pin".to_string(), "http://127.0.0.1:1/pin".to_string())].into(),
        jobs: vec![snapshot_job()],
        cursor_path: None,
        tick_ms: 1000,
        poll_ms: 100,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("node.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    let loaded = NodeConfigFile::load(&path).unwrap();
    assert_eq!(loaded, cfg);
    let node = loaded.build(f.stack.clock.clone()).unwrap();
    assert_eq!(node.jobs().len(), 1);
}

#[test]
fn auditor_with_unreachable_source_reports_unavailable() {
    struct Down;
    impl crate::slicing::SliceSource for Down {
        fn fetch(&self, _: &str) -> Result<Vec<u8>, crate::slicing::FetchError> {
            Err(crate::slicing::FetchError::Unavailable("down".into()))
        }
    }
    let f = fixture();
    let auditor: AuditorAdapter = f.stack.auditor_over(Arc::new(Down));
    let mut node = f.stack.node_with_auditor(f.dep.node_settings(), Arc::new(f.cursor.clone()), auditor);
    node.register_job(snapshot_job()).unwrap();
    f.request_snapshot();
    node.poll_and_dispatch().unwrap();
    node.register_job(audit_job(f.dep.validator, 10)).unwrap();
    let run = node.tick(10).remove(0);
    assert_eq!(run.last_output().unwrap()["verdict"], "UNAVAILABLE");
}
