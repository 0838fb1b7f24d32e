use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::address::{sha256, Address};
use crate::canonical::to_canonical_bytes;

pub type Amount = u64;
pub type KeyValue = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AccountKind {
    Eoa,
    Contract { code_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub address: Address,
    pub kind: AccountKind,
    pub balance_link: Amount,
    pub nonce: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub contract_state: KeyValue,
}

impl Account {
    pub fn eoa(address: Address, balance_link: Amount) -> Self {
        Self { address, kind: AccountKind::Eoa, balance_link, nonce: 0, contract_state: KeyValue::new() }
    }

    pub fn is_contract(&self) -> bool {
        matches!(self.kind, AccountKind::Contract { .. })
    }

    pub fn code_id(&self) -> Option<&str> {
        match &self.kind {
            AccountKind::Contract { code_id } => Some(code_id),
            AccountKind::Eoa => None,
        }
    }
}

/// Contract call payload, encoded as `{"fn": name, "args": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Call {
    #[serde(rename = "fn")]
    pub function: String,
    #[serde(default)]
    pub args: Value,
}

impl Call {
    pub fn new(function: impl Into<String>, args: Value) -> Self {
        Self { function: function.into(), args }
    }
}

pub const DEPLOY_FN: &str = "deploy";

/// A transaction. `to == None` deploys a contract; the call is then
/// `{"fn": "deploy", "args": {"code_id": .., "init": {..}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub from: Address,
    #[serde(default)]
    pub to: Option<Address>,
    pub nonce: u64,
    #[serde(default)]
    pub call: Option<Call>,
    #[serde(default)]
    pub link_value: Amount,
}

impl Transaction {
    pub fn transfer(from: Address, to: Address, nonce: u64, amount: Amount) -> Self {
        Self { from, to: Some(to), nonce, call: None, link_value: amount }
    }

    pub fn call(from: Address, to: Address, nonce: u64, call: Call) -> Self {
        Self { from, to: Some(to), nonce, call: Some(call), link_value: 0 }
    }

    pub fn deploy(from: Address, nonce: u64, code_id: &str, init: Value) -> Self {
        Self {
            from,
            to: None,
            nonce,
            call: Some(Call::new(DEPLOY_FN, serde_json::json!({ "code_id": code_id, "init": init }))),
            link_value: 0,
        }
    }

    /// `0x` + hex sha256 of the canonical transaction encoding.
    pub fn hash(&self) -> String {
        format!("0x{}", hex::encode(sha256(&to_canonical_bytes(self))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub emitter: Address,
    pub topic: String,
    pub data: KeyValue,
    pub block_number: u64,
    pub index_in_block: u32,
}

impl Event {
    /// Position in the global event order.
    pub fn position(&self) -> (u64, u32) {
        (self.block_number, self.index_in_block)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TxStatus {
    Success,
    Failed { reason: String },
}

impl TxStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, TxStatus::Success)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receipt {
    pub tx_hash: String,
    #[serde(flatten)]
    pub status: TxStatus,
    pub block_number: u64,
    pub events: Vec<Event>,
    #[serde(default)]
    pub output: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract_address: Option<Address>,
}

impl Receipt {
    pub fn is_success(&self) -> bool {
        self.status.is_success()
    }

    pub fn revert_reason(&self) -> Option<&str> {
        match &self.status {
            TxStatus::Failed { reason } => Some(reason),
            TxStatus::Success => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SealedTx {
    pub hash: String,
    pub tx: Transaction,
    #[serde(flatten)]
    pub status: TxStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub number: u64,
    pub timestamp: u64,
    pub transactions: Vec<SealedTx>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventFilter {
    #[serde(default)]
    pub from_block: u64,
    #[serde(default)]
    pub topic: Option<String>,
    #[serde(default)]
    pub emitter: Option<Address>,
}

impl EventFilter {
    pub fn topic(from_block: u64, topic: &str) -> Self {
        Self { from_block, topic: Some(topic.to_string()), emitter: None }
    }

    pub fn with_emitter(mut self, emitter: Address) -> Self {
        self.emitter = Some(emitter);
        self
    }

    pub fn matches(&self, e: &Event) -> bool {
        e.block_number >= self.from_block
            && self.topic.as_deref().is_none_or(|t| t == e.topic)
            && self.emitter.is_none_or(|a| a == e.emitter)
    }
}
