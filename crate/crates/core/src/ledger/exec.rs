//! Contract execution context. Contracts are native Rust behaviours keyed by
//! `code_id`; their persistent state lives in the owning account's
//! `contract_state` map.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::address::Address;
use super::types::{Account, AccountKind, Amount, KeyValue};

/// Only code with this id may move LINK on behalf of its immediate caller.
pub const TOKEN_AUTHORITY_CODE: &str = "link_token";

const MAX_CALL_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{0}")]
pub struct Revert(pub String);

impl Revert {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

/// `require!(cond, "reason")`: revert unless `cond` holds.
#[macro_export]
macro_rules! require {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err($crate::ledger::Revert::new(format!($($msg)+)));
        }
    };
}

pub trait ContractCode: Send + Sync {
    fn code_id(&self) -> &'static str;

    fn construct(&self, ctx: &mut CallContext<'_>, init: &Value) -> Result<(), Revert>;

    fn call(&self, ctx: &mut CallContext<'_>, function: &str, args: &Value) -> Result<Value, Revert>;

    /// Whether `function` accepts LINK attached to the call.
    fn payable(&self, _function: &str) -> bool {
        false
    }
}

#[derive(Clone, Default)]
pub struct Registry {
    codes: BTreeMap<String, Arc<dyn ContractCode>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, code: Arc<dyn ContractCode>) {
        self.codes.insert(code.code_id().to_string(), code);
    }

    pub fn get(&self, code_id: &str) -> Option<Arc<dyn ContractCode>> {
        self.codes.get(code_id).cloned()
    }

    pub fn code_ids(&self) -> impl Iterator<Item = &str> {
        self.codes.keys().map(String::as_str)
    }
}

pub(crate) type Accounts = BTreeMap<Address, Account>;

#[derive(Debug, Clone)]
pub(crate) struct PendingEvent {
    pub emitter: Address,
    pub topic: String,
    pub data: KeyValue,
}

pub struct CallContext<'a> {
    pub(crate) accounts: &'a mut Accounts,
    pub(crate) registry: &'a Registry,
    pub(crate) events: &'a mut Vec<PendingEvent>,
    pub(crate) this: Address,
    pub(crate) caller: Address,
    pub(crate) origin: Address,
    pub(crate) value: Amount,
    pub(crate) block_number: u64,
    pub(crate) depth: usize,
}

impl<'a> CallContext<'a> {
    pub fn this(&self) -> Address {
        self.this
    }

    /// Immediate caller: the sending EOA for top-level calls, the calling
    /// contract for nested ones.
    pub fn caller(&self) -> Address {
        self.caller
    }

    pub fn origin(&self) -> Address {
        self.origin
    }

    /// LINK attached to this call (already credited to `this`).
    pub fn value(&self) -> Amount {
        self.value
    }

    pub fn block_number(&self) -> u64 {
        self.block_number
    }

    pub fn balance_of(&self, addr: &Address) -> Amount {
        self.accounts.get(addr).map(|a| a.balance_link).unwrap_or(0)
    }

    pub fn code_id_of(&self, addr: &Address) -> Option<&str> {
        self.accounts.get(addr).and_then(|a| a.code_id())
    }

    pub fn exists(&self, addr: &Address) -> bool {
        self.accounts.contains_key(addr)
    }

    /// Sum of every account balance.
    pub fn total_balance(&self) -> Amount {
        self.accounts.values().map(|a| a.balance_link).sum()
    }

    pub fn load_state<T: DeserializeOwned>(&self) -> Result<T, Revert> {
        let acct = self.accounts.get(&self.this).expect("executing account exists");
        let obj: serde_json::Map<String, Value> =
            acct.contract_state.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        serde_json::from_value(Value::Object(obj))
            .map_err(|e| Revert::new(format!("corrupt contract state: {e}")))
    }

    pub fn save_state<T: Serialize>(&mut self, state: &T) {
        let Value::Object(map) = serde_json::to_value(state).expect("contract state is JSON") else {
            panic!("contract state must serialize to an object");
        };
        let acct = self.accounts.get_mut(&self.this).expect("executing account exists");
        acct.contract_state = map.into_iter().collect();
    }

    pub fn emit(&mut self, topic: &str, data: KeyValue) {
        self.events.push(PendingEvent { emitter: self.this, topic: topic.to_string(), data });
    }

    /// Send LINK from this contract's own balance.
    pub fn transfer(&mut self, to: &Address, amount: Amount) -> Result<(), Revert> {
        move_link(self.accounts, &self.this, to, amount)
    }

    /// Move LINK out of the immediate caller's balance. Reserved for the
    /// token contract.
    pub fn token_transfer(&mut self, from: &Address, to: &Address, amount: Amount) -> Result<(), Revert> {
        crate::require!(
            self.code_id_of(&self.this) == Some(TOKEN_AUTHORITY_CODE),
            "only the LINK token may move caller funds"
        );
        crate::require!(*from == self.caller, "token transfers must debit the caller");
        move_link(self.accounts, from, to, amount)
    }

    /// Call another contract. The nested call's effects are rolled back if
    /// it reverts.
    pub fn call(&mut self, to: &Address, function: &str, args: Value, value: Amount) -> Result<Value, Revert> {
        crate::require!(self.depth < MAX_CALL_DEPTH, "call depth exceeded");
        let saved_accounts = self.accounts.clone();
        let saved_events = self.events.len();
        let result = invoke(
            self.accounts,
            self.registry,
            self.events,
            self.this,
            self.origin,
            *to,
            function,
            &args,
            value,
            self.block_number,
            self.depth + 1,
        );
        if result.is_err() {
            *self.accounts = saved_accounts;
            self.events.truncate(saved_events);
        }
        result
    }
}

pub(crate) fn move_link(accounts: &mut Accounts, from: &Address, to: &Address, amount: Amount) -> Result<(), Revert> {
    crate::require!(accounts.contains_key(to), "unknown recipient {to}");
    let src = accounts
        .get_mut(from)
        .ok_or_else(|| Revert::new(format!("unknown sender {from}")))?;
    crate::require!(src.balance_link >= amount, "insufficient balance");
    src.balance_link -= amount;
    accounts.get_mut(to).expect("checked above").balance_link += amount;
    Ok(())
}

/// Run `function` on contract `to`, crediting `value` from `caller` first.
#[allow(clippy::too_many_arguments)]
pub(crate) fn invoke(
    accounts: &mut Accounts,
    registry: &Registry,
    events: &mut Vec<PendingEvent>,
    caller: Address,
    origin: Address,
    to: Address,
    function: &str,
    args: &Value,
    value: Amount,
    block_number: u64,
    depth: usize,
) -> Result<Value, Revert> {
    let code_id = match accounts.get(&to).map(|a| &a.kind) {
        Some(AccountKind::Contract { code_id }) => code_id.clone(),
        Some(AccountKind::Eoa) => return Err(Revert::new(format!("{to} is not a contract"))),
        None => return Err(Revert::new(format!("unknown account {to}"))),
    };
    let code = registry
        .get(&code_id)
        .ok_or_else(|| Revert::new(format!("no code registered for {code_id}")))?;
    if value > 0 {
        crate::require!(code.payable(function), "{function} is not payable");
        move_link(accounts, &caller, &to, value)?;
    }
    let mut ctx = CallContext { accounts, registry, events, this: to, caller, origin, value, block_number, depth };
    code.call(&mut ctx, function, args)
}

/// Typed argument extraction helpers for contract implementations.
pub mod args {
    use serde::de::DeserializeOwned;
    use serde_json::Value;

    use super::Revert;

    pub fn parse<T: DeserializeOwned>(function: &str, args: &Value) -> Result<T, Revert> {
        let args = if args.is_null() { Value::Object(Default::default()) } else { args.clone() };
        serde_json::from_value(args).map_err(|e| Revert::new(format!("bad arguments to {function}: {e}")))
    }
}
