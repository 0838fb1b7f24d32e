use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{RequestId, HASH_STORED_TOPIC, ORACLE};
use crate::content_store::Cid;
use crate::ledger::{args, Address, Amount, CallContext, ContractCode, KeyValue, Revert};
use crate::require;

pub const STORE_HASH_CALLBACK: &str = "store_hash";

/// Client contract: knows which API path to protect, which node job
/// snapshots it and which oracle to pay. Holds the latest anchored CID.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatorState {
    pub owner: Address,
    pub api_path: String,
    pub job_id: String,
    pub oracle_address: Address,
    pub link_token: Address,
    pub payment: Amount,
    pub request_count: u64,
    pub stored_cid: Option<Cid>,
    pub last_update_block: Option<u64>,
    pub last_request_id: Option<RequestId>,
}

pub struct Validator;

#[derive(Deserialize)]
struct InitArgs {
    api_path: String,
    job_id: String,
    oracle_address: Address,
    #[serde(default)]
    payment: Option<Amount>,
}

#[derive(Deserialize)]
struct StoreHashArgs {
    cid: String,
    #[serde(default)]
    request_id: Option<RequestId>,
}

impl ContractCode for Validator {
    fn code_id(&self) -> &'static str {
        super::VALIDATOR
    }

    fn construct(&self, ctx: &mut CallContext<'_>, init: &Value) -> Result<(), Revert> {
        let a: InitArgs = args::parse("constructor", init)?;
        require!(!a.api_path.is_empty(), "api_path must not be empty");
        require!(!a.job_id.is_empty(), "job_id must not be empty");
        require!(
            ctx.code_id_of(&a.oracle_address) == Some(ORACLE),
            "oracle_address {} is not an oracle contract",
            a.oracle_address
        );
        let link: Address = serde_json::from_value(ctx.call(&a.oracle_address, "link_token", Value::Null, 0)?)
            .map_err(|e| Revert::new(format!("oracle returned a bad token address: {e}")))?;
        let payment = match a.payment {
            Some(p) => p,
            None => ctx
                .call(&a.oracle_address, "min_payment", Value::Null, 0)?
                .as_u64()
                .ok_or_else(|| Revert::new("oracle returned a bad minimum payment"))?,
        };
        ctx.save_state(&ValidatorState {
            owner: ctx.caller(),
            api_path: a.api_path,
            job_id: a.job_id,
            oracle_address: a.oracle_address,
            link_token: link,
            payment,
            request_count: 0,
            stored_cid: None,
            last_update_block: None,
            last_request_id: None,
        });
        Ok(())
    }

    fn call(&self, ctx: &mut CallContext<'_>, function: &str, raw: &Value) -> Result<Value, Revert> {
        let mut s: ValidatorState = ctx.load_state()?;
        match function {
            "request_snapshot" => {
                require!(ctx.caller() == s.owner, "only the owner may request snapshots");
                let nonce = s.request_count;
                s.request_count += 1;
                ctx.save_state(&s);
                let payload = json!({
                    "fn": "oracle_request",
                    "args": {
                        "job_id": s.job_id,
                        "params": { "api_path": s.api_path },
                        "callback": STORE_HASH_CALLBACK,
                        "nonce": nonce,
                    }
                });
                let out = ctx.call(
                    &s.link_token,
                    "transfer_and_call",
                    json!({ "to": s.oracle_address, "amount": s.payment, "data": payload }),
                    0,
                )?;
                let request_id: RequestId = serde_json::from_value(out)
                    .map_err(|e| Revert::new(format!("oracle returned a bad request id: {e}")))?;
                // reload: nested calls may have written our state
                let mut s: ValidatorState = ctx.load_state()?;
                s.last_request_id = Some(request_id);
                ctx.save_state(&s);
                Ok(json!(request_id))
            }
            STORE_HASH_CALLBACK => {
                require!(ctx.caller() == s.oracle_address, "only the oracle may store hashes");
                let a: StoreHashArgs = args::parse(function, raw)?;
                let cid: Cid = a
                    .cid
                    .parse()
                    .map_err(|e| Revert::new(format!("malformed cid {:?}: {e}", a.cid)))?;
                s.stored_cid = Some(cid.clone());
                s.last_update_block = Some(ctx.block_number());
                ctx.save_state(&s);
                let mut data = KeyValue::from([("cid".into(), json!(cid))]);
                if let Some(id) = a.request_id {
                    data.insert("request_id".into(), json!(id));
                }
                ctx.emit(HASH_STORED_TOPIC, data);
                Ok(json!(true))
            }
            "get_stored_hash" => Ok(json!(s.stored_cid)),
            "get_api_path" => Ok(json!(s.api_path)),
            "get_config" => Ok(serde_json::to_value(&s).expect("state serializes")),
            other => Err(Revert::new(format!("validator: unknown function {other}"))),
        }
    }
}
