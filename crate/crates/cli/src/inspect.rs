use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};
use slice_integrity::clock::VirtualClock;
use slice_integrity::content_store::http::HttpObjectStore;
use slice_integrity::content_store::ContentStore;
use slice_integrity::harness::CHAIN_FILE;
use slice_integrity::ledger::http::HttpLedger;
use slice_integrity::ledger::{ChainSnapshot, LedgerClient, TxStatus};
use slice_integrity::net::HttpClient;
use slice_integrity::slicing::SlicingController;

use crate::CliResult;

#[derive(Clone, Copy, ValueEnum)]
pub enum Target {
    Chain,
    Store,
    Slices,
}

#[derive(Args)]
pub struct InspectArgs {
    #[arg(value_enum)]
    target: Target,
    /// Read a state directory written by `scenario run --state-dir`
    /// instead of querying the running services.
    #[arg(long)]
    state_dir: Option<PathBuf>,
    #[arg(long, env = "LEDGER_URL", default_value = "http://127.0.0.1:8545")]
    ledger_url: String,
    #[arg(long, env = "STORE_URL", default_value = "http://127.0.0.1:5001")]
    store_url: String,
    #[arg(long, env = "CONTROLLER_URL", default_value = "http://127.0.0.1:8080")]
    controller_url: String,
}

pub fn run(args: InspectArgs) -> CliResult {
    let out = match args.target {
        Target::Chain => {
            let chain: ChainSnapshot = match &args.state_dir {
                Some(dir) => serde_json::from_slice(&std::fs::read(dir.join(CHAIN_FILE))?)?,
                None => HttpLedger::new(&args.ledger_url).snapshot()?,
            };
            chain_summary(&chain)
        }
        Target::Store => match &args.state_dir {
            Some(dir) => json!(ContentStore::open(dir.join("store"), None)?.list()),
            None => HttpObjectStore::new(&args.store_url).list()?,
        },
        Target::Slices => match &args.state_dir {
            Some(dir) => {
                let c = SlicingController::open(dir.join("controller"), Arc::new(VirtualClock::new()))?;
                json!({ "tenants": c.tenants() })
            }
            None => HttpClient::new(&args.controller_url).get_json("/api/v1/tenants")?,
        },
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

/// Counts and balances a reader needs at a glance.
pub fn chain_summary(chain: &ChainSnapshot) -> Value {
    let mut events: BTreeMap<&str, usize> = BTreeMap::new();
    let mut calls: BTreeMap<String, usize> = BTreeMap::new();
    let (mut total, mut failed) = (0, 0);
    for block in &chain.blocks {
        for e in &block.events {
            *events.entry(e.topic.as_str()).or_default() += 1;
        }
        for sealed in &block.transactions {
            total += 1;
            match &sealed.status {
                TxStatus::Success => {
                    if let Some(call) = &sealed.tx.call {
                        *calls.entry(call.function.clone()).or_default() += 1;
                    }
                }
                TxStatus::Failed { .. } => failed += 1,
            }
        }
    }
    let accounts: Vec<Value> = chain
        .accounts
        .iter()
        .map(|a| json!({ "address": a.address, "kind": a.kind, "balance_link": a.balance_link, "nonce": a.nonce }))
        .collect();
    json!({
        "height": chain.blocks.last().map_or(0, |b| b.number),
        "transactions": total,
        "failed_transactions": failed,
        "successful_calls": calls,
        "events": events,
        "oracle_requests": events.get("OracleRequest").copied().unwrap_or(0),
        "fulfill_transactions": calls.get("fulfill").copied().unwrap_or(0),
        "total_supply": chain.accounts.iter().map(|a| a.balance_link).sum::<u64>(),
        "accounts": accounts,
    })
}
