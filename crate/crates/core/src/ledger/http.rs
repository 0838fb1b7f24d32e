//! JSON-RPC-style endpoint: `POST /` with
//! `{"jsonrpc":"2.0","id":..,"method":..,"params":{..}}`.
//!
//! Methods: `submit_transaction`, `get_events`, `get_account`, `get_block`,
//! `get_height`, `call`, `create_eoa`, `get_chain`.

use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::Response;
use axum::routing::post;
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::address::Address;
use super::chain::{ChainSnapshot, LedgerError};
use super::client::{LedgerClient, LocalLedger};
use super::types::{Account, Block, Event, EventFilter, Receipt, Transaction};
use crate::net::{json_response, HttpClient};

#[derive(Debug, Serialize, Deserialize)]
pub struct RpcRequest {
    #[serde(default = "default_version")]
    pub jsonrpc: String,
    #[serde(default)]
    pub id: Value,
    pub method: String,
    #[serde(default)]
    pub params: Value,
}

fn default_version() -> String {
    "2.0".into()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RpcError {
    pub code: i64,
    pub message: String,
    /// The structured [`LedgerError`], when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<LedgerError>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RpcResponse {
    pub jsonrpc: String,
    pub id: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RpcError>,
}

#[derive(Clone)]
struct RpcState {
    ledger: LocalLedger,
    seal_delay: Duration,
}

/// JSON-RPC router over an in-process ledger. `seal_delay` is slept before
/// every `submit_transaction` to stand in for network confirmation latency.
pub fn router(ledger: LocalLedger, seal_delay: Duration) -> Router {
    Router::new().route("/", post(rpc)).with_state(RpcState { ledger, seal_delay })
}

async fn rpc(State(state): State<RpcState>, body: axum::body::Bytes) -> Response {
    let req: RpcRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => {
            let resp = RpcResponse {
                jsonrpc: default_version(),
                id: Value::Null,
                result: None,
                error: Some(RpcError { code: -32700, message: format!("parse error: {e}"), data: None }),
            };
            return json_response(StatusCode::BAD_REQUEST, &resp);
        }
    };
    if req.method == "submit_transaction" && !state.seal_delay.is_zero() {
        tokio::time::sleep(state.seal_delay).await;
    }
    let id = req.id.clone();
    let ledger = state.ledger.clone();
    let outcome = tokio::task::spawn_blocking(move || dispatch(&ledger, &req.method, req.params))
        .await
        .unwrap_or_else(|e| Err(RpcError { code: -32603, message: e.to_string(), data: None }));
    let (result, error) = match outcome {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e)),
    };
    json_response(StatusCode::OK, &RpcResponse { jsonrpc: default_version(), id, result, error })
}

fn params<T: DeserializeOwned>(params: Value) -> Result<T, RpcError> {
    serde_json::from_value(params)
        .map_err(|e| RpcError { code: -32602, message: format!("invalid params: {e}"), data: None })
}

fn ledger_err(e: LedgerError) -> RpcError {
    RpcError { code: -32000, message: e.to_string(), data: Some(e) }
}

fn to_value<T: Serialize>(v: T) -> Result<Value, RpcError> {
    Ok(serde_json::to_value(v).expect("ledger types serialize"))
}

fn dispatch(ledger: &LocalLedger, method: &str, p: Value) -> Result<Value, RpcError> {
    #[derive(Deserialize)]
    struct AddressParam {
        address: Address,
    }
    #[derive(Deserialize)]
    struct NumberParam {
        number: u64,
    }
    #[derive(Deserialize)]
    struct SeedParam {
        seed: u64,
    }
    #[derive(Deserialize)]
    struct CallParam {
        to: Address,
        #[serde(rename = "fn")]
        function: String,
        #[serde(default)]
        args: Value,
    }
    match method {
        "submit_transaction" => {
            let tx: Transaction = params(p)?;
            to_value(ledger.submit_transaction(tx).map_err(ledger_err)?)
        }
        "get_events" => {
            let filter: EventFilter = if p.is_null() { EventFilter::default() } else { params(p)? };
            to_value(ledger.get_events(&filter).map_err(ledger_err)?)
        }
        "get_account" => {
            let a: AddressParam = params(p)?;
            to_value(ledger.get_account(&a.address).map_err(ledger_err)?)
        }
        "get_block" => {
            let n: NumberParam = params(p)?;
            to_value(ledger.get_block(n.number).map_err(ledger_err)?)
        }
        "get_height" => to_value(ledger.height().map_err(ledger_err)?),
        "call" => {
            let c: CallParam = params(p)?;
            ledger.call_view(&c.to, &c.function, c.args).map_err(ledger_err)
        }
        "create_eoa" => {
            let s: SeedParam = params(p)?;
            to_value(ledger.create_eoa(s.seed).map_err(ledger_err)?)
        }
        "get_chain" => to_value(ledger.snapshot().map_err(ledger_err)?),
        other => Err(RpcError { code: -32601, message: format!("unknown method {other}"), data: None }),
    }
}

/// [`LedgerClient`] speaking to the endpoint above.
#[derive(Clone)]
pub struct HttpLedger {
    client: HttpClient,
}

impl HttpLedger {
    pub fn new(url: impl Into<String>) -> Self {
        Self { client: HttpClient::new(url) }
    }

    fn request<T: DeserializeOwned>(&self, method: &str, params: Value) -> Result<T, LedgerError> {
        let req = RpcRequest { jsonrpc: default_version(), id: json!(1), method: method.into(), params };
        let resp: RpcResponse = self
            .client
            .post_json("/", &req)
            .map_err(|e| LedgerError::Unavailable { reason: e.to_string() })?;
        if let Some(err) = resp.error {
            return Err(err.data.unwrap_or(LedgerError::Invalid { reason: err.message }));
        }
        serde_json::from_value(resp.result.unwrap_or(Value::Null))
            .map_err(|e| LedgerError::Unavailable { reason: format!("malformed result: {e}") })
    }
}

impl LedgerClient for HttpLedger {
    fn submit_transaction(&self, tx: Transaction) -> Result<Receipt, LedgerError> {
        self.request("submit_transaction", serde_json::to_value(tx).expect("tx serializes"))
    }

    fn get_events(&self, filter: &EventFilter) -> Result<Vec<Event>, LedgerError> {
        self.request("get_events", serde_json::to_value(filter).expect("filter serializes"))
    }

    fn get_account(&self, address: &Address) -> Result<Option<Account>, LedgerError> {
        self.request("get_account", json!({ "address": address }))
    }

    fn get_block(&self, number: u64) -> Result<Option<Block>, LedgerError> {
        self.request("get_block", json!({ "number": number }))
    }

    fn height(&self) -> Result<u64, LedgerError> {
        self.request("get_height", Value::Null)
    }

    fn call_view(&self, to: &Address, function: &str, args: Value) -> Result<Value, LedgerError> {
        self.request("call", json!({ "to": to, "fn": function, "args": args }))
    }

    fn create_eoa(&self, seed: u64) -> Result<Address, LedgerError> {
        self.request("create_eoa", json!({ "seed": seed }))
    }

    fn snapshot(&self) -> Result<ChainSnapshot, LedgerError> {
        self.request("get_chain", Value::Null)
    }
}
