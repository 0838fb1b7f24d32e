use serde::Deserialize;
use serde_json::{json, Value};

use super::{LINK_TOKEN, TRANSFER_TOPIC};
use crate::ledger::{args, Address, Amount, CallContext, ContractCode, KeyValue, Revert};
use crate::require;

/// LINK token facade over the ledger-native balances. `transfer_and_call`
/// moves funds and notifies the recipient contract in one atomic step.
pub struct LinkToken;

#[derive(Deserialize)]
struct TransferArgs {
    to: Address,
    amount: Amount,
}

#[derive(Deserialize)]
struct TransferAndCallArgs {
    to: Address,
    amount: Amount,
    #[serde(default)]
    data: Value,
}

#[derive(Deserialize)]
struct BalanceArgs {
    owner: Address,
}

fn transfer_event(from: Address, to: Address, amount: Amount) -> KeyValue {
    KeyValue::from([
        ("from".into(), json!(from)),
        ("to".into(), json!(to)),
        ("amount".into(), json!(amount)),
    ])
}

impl ContractCode for LinkToken {
    fn code_id(&self) -> &'static str {
        LINK_TOKEN
    }

    fn construct(&self, ctx: &mut CallContext<'_>, _init: &Value) -> Result<(), Revert> {
        ctx.save_state(&json!({ "symbol": "LINK" }));
        Ok(())
    }

    fn call(&self, ctx: &mut CallContext<'_>, function: &str, raw: &Value) -> Result<Value, Revert> {
        match function {
            "transfer" => {
                let a: TransferArgs = args::parse(function, raw)?;
                let from = ctx.caller();
                ctx.token_transfer(&from, &a.to, a.amount)?;
                ctx.emit(TRANSFER_TOPIC, transfer_event(from, a.to, a.amount));
                Ok(json!(true))
            }
            "transfer_and_call" => {
                let a: TransferAndCallArgs = args::parse(function, raw)?;
                require!(ctx.code_id_of(&a.to).is_some(), "transfer_and_call target {} is not a contract", a.to);
                let from = ctx.caller();
                ctx.token_transfer(&from, &a.to, a.amount)?;
                ctx.emit(TRANSFER_TOPIC, transfer_event(from, a.to, a.amount));
                ctx.call(
                    &a.to,
                    "on_token_transfer",
                    json!({ "sender": from, "amount": a.amount, "data": a.data }),
                    0,
                )
            }
            "balance_of" => {
                let a: BalanceArgs = args::parse(function, raw)?;
                Ok(json!(ctx.balance_of(&a.owner)))
            }
            "total_supply" => Ok(json!(ctx.total_balance())),
            other => Err(Revert::new(format!("link_token: unknown function {other}"))),
        }
    }
}
