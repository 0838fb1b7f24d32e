use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{RequestId, AUTHORIZATION_TOPIC, LINK_TOKEN, ORACLE, ORACLE_FULFILLED_TOPIC, ORACLE_REQUEST_TOPIC};
use crate::ledger::{args, Address, Amount, CallContext, ContractCode, KeyValue, Revert};
use crate::require;

pub const DEFAULT_MIN_PAYMENT: Amount = 1;

/// A pending work request, created by a paid `transfer_and_call`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub request_id: RequestId,
    pub requester: Address,
    pub job_id: String,
    pub payment: Amount,
    pub params: KeyValue,
    pub callback: String,
    pub nonce: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleState {
    pub owner: Address,
    pub link_token: Address,
    pub min_payment: Amount,
    pub authorized_nodes: BTreeSet<Address>,
    pub pending: BTreeMap<RequestId, OracleRequest>,
    pub escrow: BTreeMap<RequestId, Amount>,
    /// Ids already fulfilled; never accepted again.
    pub retired: BTreeSet<RequestId>,
}

impl OracleState {
    pub fn escrow_total(&self) -> Amount {
        self.escrow.values().sum()
    }
}

/// On-chain gateway: accepts paid requests, emits `OracleRequest` events for
/// nodes, and releases escrow to an authorized node on fulfillment.
pub struct Oracle;

#[derive(Deserialize)]
struct InitArgs {
    link_token: Address,
    #[serde(default)]
    min_payment: Option<Amount>,
}

#[derive(Deserialize)]
struct TokenTransferArgs {
    sender: Address,
    amount: Amount,
    data: Value,
}

#[derive(Deserialize)]
struct RequestArgs {
    job_id: String,
    params: KeyValue,
    callback: String,
    nonce: u64,
}

#[derive(Deserialize)]
struct FulfillArgs {
    request_id: RequestId,
    #[serde(default)]
    data: KeyValue,
}

#[derive(Deserialize)]
struct AuthorizationArgs {
    node: Address,
    allowed: bool,
}

#[derive(Deserialize)]
struct NodeArgs {
    node: Address,
}

#[derive(Deserialize)]
struct RequestIdArgs {
    request_id: RequestId,
}

impl Oracle {
    fn oracle_request(
        ctx: &mut CallContext<'_>,
        state: &mut OracleState,
        requester: Address,
        payment: Amount,
        raw: &Value,
    ) -> Result<Value, Revert> {
        let a: RequestArgs = args::parse("oracle_request", raw)?;
        require!(payment >= state.min_payment, "payment too low");
        let api_path = a
            .params
            .get("api_path")
            .and_then(Value::as_str)
            .ok_or_else(|| Revert::new("request params must carry api_path"))?
            .to_string();
        let request_id = RequestId::compute(&requester, a.nonce, &a.job_id);
        require!(
            !state.pending.contains_key(&request_id) && !state.retired.contains(&request_id),
            "duplicate request id {request_id}"
        );
        state.escrow.insert(request_id, payment);
        state.pending.insert(
            request_id,
            OracleRequest {
                request_id,
                requester,
                job_id: a.job_id.clone(),
                payment,
                params: a.params,
                callback: a.callback.clone(),
                nonce: a.nonce,
            },
        );
        ctx.save_state(state);
        ctx.emit(
            ORACLE_REQUEST_TOPIC,
            KeyValue::from([
                ("request_id".into(), json!(request_id)),
                ("job_id".into(), json!(a.job_id)),
                ("api_path".into(), json!(api_path)),
                ("callback".into(), json!(a.callback)),
                ("payment".into(), json!(payment)),
                ("requester".into(), json!(requester)),
            ]),
        );
        Ok(json!(request_id))
    }

    fn fulfill(ctx: &mut CallContext<'_>, state: &mut OracleState, raw: &Value) -> Result<Value, Revert> {
        let a: FulfillArgs = args::parse("fulfill", raw)?;
        let node = ctx.caller();
        require!(state.authorized_nodes.contains(&node), "node {node} is not authorized");
        let request = state
            .pending
            .remove(&a.request_id)
            .ok_or_else(|| Revert::new(format!("unknown or already fulfilled request {}", a.request_id)))?;
        let payment = state.escrow.remove(&a.request_id).expect("escrow mirrors pending");
        state.retired.insert(a.request_id);
        ctx.save_state(state);
        ctx.transfer(&node, payment)?;
        ctx.emit(
            ORACLE_FULFILLED_TOPIC,
            KeyValue::from([
                ("request_id".into(), json!(a.request_id)),
                ("node".into(), json!(node)),
                ("payment".into(), json!(payment)),
            ]),
        );
        let mut callback_args = a.data;
        callback_args.insert("request_id".into(), json!(a.request_id));
        ctx.call(&request.requester, &request.callback, json!(callback_args), 0)
            .map_err(|r| Revert::new(format!("callback {} failed: {}", request.callback, r)))?;
        Ok(json!(true))
    }
}

impl ContractCode for Oracle {
    fn code_id(&self) -> &'static str {
        ORACLE
    }

    fn construct(&self, ctx: &mut CallContext<'_>, init: &Value) -> Result<(), Revert> {
        let a: InitArgs = args::parse("constructor", init)?;
        require!(
            ctx.code_id_of(&a.link_token) == Some(LINK_TOKEN),
            "link_token {} is not a LINK token contract",
            a.link_token
        );
        let state = OracleState {
            owner: ctx.caller(),
            link_token: a.link_token,
            min_payment: a.min_payment.unwrap_or(DEFAULT_MIN_PAYMENT),
            authorized_nodes: BTreeSet::new(),
            pending: BTreeMap::new(),
            escrow: BTreeMap::new(),
            retired: BTreeSet::new(),
        };
        ctx.save_state(&state);
        Ok(())
    }

    fn call(&self, ctx: &mut CallContext<'_>, function: &str, raw: &Value) -> Result<Value, Revert> {
        let mut state: OracleState = ctx.load_state()?;
        match function {
            "on_token_transfer" => {
                require!(ctx.caller() == state.link_token, "only the LINK token may call on_token_transfer");
                let a: TokenTransferArgs = args::parse(function, raw)?;
                let inner = a.data.get("fn").and_then(Value::as_str).unwrap_or_default();
                require!(inner == "oracle_request", "unsupported payload function {inner:?}");
                let inner_args = a.data.get("args").cloned().unwrap_or(Value::Null);
                Self::oracle_request(ctx, &mut state, a.sender, a.amount, &inner_args)
            }
            "oracle_request" => Err(Revert::new(
                "oracle_request must be paid through LINK transfer_and_call",
            )),
            "fulfill" => Self::fulfill(ctx, &mut state, raw),
            "set_authorization" => {
                require!(ctx.caller() == state.owner, "only the owner may change authorizations");
                let a: AuthorizationArgs = args::parse(function, raw)?;
                if a.allowed {
                    state.authorized_nodes.insert(a.node);
                } else {
                    state.authorized_nodes.remove(&a.node);
                }
                ctx.save_state(&state);
                ctx.emit(
                    AUTHORIZATION_TOPIC,
                    KeyValue::from([("node".into(), json!(a.node)), ("allowed".into(), json!(a.allowed))]),
                );
                Ok(json!(true))
            }
            "is_authorized" => {
                let a: NodeArgs = args::parse(function, raw)?;
                Ok(json!(state.authorized_nodes.contains(&a.node)))
            }
            "get_request" => {
                let a: RequestIdArgs = args::parse(function, raw)?;
                Ok(serde_json::to_value(state.pending.get(&a.request_id)).expect("request serializes"))
            }
            "is_retired" => {
                let a: RequestIdArgs = args::parse(function, raw)?;
                Ok(json!(state.retired.contains(&a.request_id)))
            }
            "pending_count" => Ok(json!(state.pending.len())),
            "escrow_total" => Ok(json!(state.escrow_total())),
            "min_payment" => Ok(json!(state.min_payment)),
            "link_token" => Ok(json!(state.link_token)),
            "owner" => Ok(json!(state.owner)),
            "state" => Ok(serde_json::to_value(&state).expect("state serializes")),
            other => Err(Revert::new(format!("oracle: unknown function {other}"))),
        }
    }
}
