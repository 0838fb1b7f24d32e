use std::process::{Command, Output};
use std::sync::Arc;

use slice_integrity::clock::VirtualClock;
use slice_integrity::harness::{deploy, snapshot_job, LiveStack};
use slice_integrity::ledger::{LedgerClient, LedgerConfig};
use slice_integrity::node::{MemoryCursor, RunStatus};
use slice_integrity::slicing::{ControllerApi, SlicePath};

const TID: &str = "f7257cce-d05e-4f43-a0a6-f19236948f2f";

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slice-integrity"))
        .args(args)
        .env_remove("VALIDATOR_ADDRESS")
        .env_remove("LEDGER_URL")
        .env_remove("ADAPTERS_URL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(cli(&["scenario", "run", "--mode", "sideways"]).status.code(), Some(64));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn scenario_run_prints_both_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.jsonl");
    let o = cli(&["scenario", "run", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = format!("/api/v1/tenants/{TID}/slices/0x00");
    assert_eq!(
        stdout(&o).lines().collect::<Vec<_>>(),
        [format!("SUCCESS: Rota: {path} verificada!"), format!("ERROR: Rota: {path} corrompida!")]
    );
    assert!(std::fs::read_to_string(out).unwrap().contains("\"reports\""));
}

#[test]
fn inspect_chain_reads_a_state_dir() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state");
    let s = state.to_str().unwrap();
    assert_eq!(cli(&["scenario", "run", "--state-dir", s]).status.code(), Some(0));
    let o = cli(&["inspect", "chain", "--state-dir", s]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["oracle_requests"].as_u64().unwrap() >= 1);
    assert_eq!(summary["fulfill_transactions"], 1);
}

#[test]
fn audit_once_exit_codes_follow_the_verdict() {
    let clock = Arc::new(VirtualClock::new());
    let stack = LiveStack::start(LedgerConfig { initial_supply: 1_000, treasury_seed: 0 }, clock.clone()).unwrap();
    let controller = stack.controller_client();
    controller.create_tenant("tenant-a", Some(TID)).unwrap();
    controller.create_slice(TID, "0x00", 100, vec![]).unwrap();
    let ledger = stack.ledger_client();
    let dep = deploy(&ledger, stack.treasury, &SlicePath::new(TID, "0x00"), 1, 10).unwrap();
    let validator = dep.validator.to_string();
    let args = [
        "audit",
        "once",
        "--validator",
        validator.as_str(),
        "--ledger-url",
        &stack.ledger.url(),
        "--adapters-url",
        &stack.adapters.url(),
    ];

    // nothing anchored yet
    assert_eq!(cli(&args).status.code(), Some(1));

    ledger.send_call(dep.admin, dep.validator, "request_snapshot", serde_json::json!({})).unwrap();
    let mut node = stack.node(dep.node_settings(), Arc::new(MemoryCursor::new()), clock);
    node.register_job(snapshot_job()).unwrap();
    let runs = node.poll_and_dispatch().unwrap();
    assert_eq!(runs[0].status, RunStatus::Success, "{:?}", runs[0].error);

    let o = cli(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("SUCCESS: Rota: "));

    controller.update_quantum(TID, "0x00", 200).unwrap();
    let o = cli(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("ERROR: Rota: "));

    stack.controller_api.set_online(false);
    let o = cli(&args);
    assert_eq!(o.status.code(), Some(3));
    assert!(!stdout(&o).contains("corrompida"));
    stack.shutdown();
}
