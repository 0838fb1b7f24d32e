use std::fs;

use clap::Args;
use serde_json::{json, Map};
use slice_integrity::adapters::{AdapterRequest, IntegrityReport, Verdict};
use slice_integrity::harness::{run_scenario_in, ScenarioConfig};
use slice_integrity::ledger::http::HttpLedger;
use slice_integrity::ledger::{Address, LedgerClient};
use slice_integrity::net::HttpClient;

use crate::{CliResult, ScenarioRunArgs, EXIT_CORRUPTED, EXIT_FAILURE, EXIT_UNAVAILABLE};

pub fn scenario_run(args: ScenarioRunArgs) -> CliResult {
    let mut config = match &args.config {
        Some(path) => serde_json::from_slice(&fs::read(path)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(mode) = args.mode {
        config.mode = mode.into();
    }
    if let Some(dir) = &args.state_dir {
        fs::create_dir_all(dir)?;
    }
    match run_scenario_in(&config, args.state_dir.as_deref()) {
        Ok(transcript) => {
            for line in transcript.log_lines() {
                println!("{line}");
            }
            if let Some(out) = &args.out {
                fs::write(out, transcript.to_jsonl())?;
            }
            Ok(0)
        }
        Err(e) => {
            for line in e.transcript.log_lines() {
                println!("{line}");
            }
            if let Some(out) = &args.out {
                fs::write(out, e.transcript.to_jsonl())?;
            }
            eprintln!("error: {e}");
            Ok(EXIT_FAILURE)
        }
    }
}

#[derive(Args)]
pub struct AuditOnceArgs {
    /// Validator contract holding the anchored CID.
    #[arg(long, env = "VALIDATOR_ADDRESS")]
    validator: Address,
    #[arg(long, env = "LEDGER_URL", default_value = "http://127.0.0.1:8545")]
    ledger_url: String,
    #[arg(long, env = "ADAPTERS_URL", default_value = "http://127.0.0.1:8081")]
    adapters_url: String,
}

pub fn audit_once(args: AuditOnceArgs) -> CliResult {
    let ledger = HttpLedger::new(&args.ledger_url);
    let stored = ledger.call_view(&args.validator, "get_stored_hash", json!({}))?;
    let Some(expected) = stored.as_str() else {
        eprintln!("error: validator {} has no anchored snapshot yet", args.validator);
        return Ok(EXIT_FAILURE);
    };
    let api_path = ledger.call_view(&args.validator, "get_api_path", json!({}))?;
    let mut data = Map::new();
    data.insert("api_path".into(), api_path);
    data.insert("hashIpfs".into(), json!(expected));
    let req = AdapterRequest::new("cli", data);
    let report: IntegrityReport = HttpClient::new(&args.adapters_url).post_json("/validate", &req)?;
    println!("{}", report.log_line());
    println!("{}", serde_json::to_string(&report)?);
    Ok(match report.verdict {
        Verdict::Verified => 0,
        Verdict::Corrupted => EXIT_CORRUPTED,
        Verdict::Unavailable => EXIT_UNAVAILABLE,
    })
}

#[derive(Args)]
pub struct SnapshotArgs {
    #[arg(long, env = "VALIDATOR_ADDRESS")]
    validator: Address,
    /// Sender; defaults to the ledger treasury, which owns the deployment.
    #[arg(long)]
    from: Option<Address>,
    #[arg(long, env = "LEDGER_URL", default_value = "http://127.0.0.1:8545")]
    ledger_url: String,
}

pub fn snapshot_request(args: SnapshotArgs) -> CliResult {
    let ledger = HttpLedger::new(&args.ledger_url);
    let from = match args.from {
        Some(a) => a,
        None => ledger.snapshot()?.treasury,
    };
    let receipt = ledger.send_call(from, args.validator, "request_snapshot", json!({}))?;
    if let Some(reason) = receipt.revert_reason() {
        eprintln!("error: request_snapshot reverted: {reason}");
        return Ok(EXIT_FAILURE);
    }
    println!(
        "{}",
        json!({ "request_id": receipt.output, "tx_hash": receipt.tx_hash, "block": receipt.block_number })
    );
    Ok(0)
}
