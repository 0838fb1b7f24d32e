use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::address::Address;
use super::exec::{invoke, move_link, Accounts, CallContext, PendingEvent, Registry, Revert};
use super::types::{
    Account, AccountKind, Amount, Block, Call, Event, EventFilter, KeyValue, Receipt, SealedTx,
    Transaction, TxStatus, DEPLOY_FN,
};
use crate::clock::{Clock, VirtualClock};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerConfig {
    /// Entire LINK supply, credited to the treasury EOA at genesis.
    pub initial_supply: Amount,
    pub treasury_seed: u64,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        Self { initial_supply: 1_000_000, treasury_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LedgerError {
    #[error("account {address} already exists")]
    AlreadyExists { address: Address },
    #[error("unknown account {address}")]
    UnknownAccount { address: Address },
    #[error("{address} is a contract and cannot originate transactions")]
    NotAnEoa { address: Address },
    #[error("bad nonce for {address}: expected {expected}, got {got}")]
    BadNonce { address: Address, expected: u64, got: u64 },
    #[error("insufficient balance: {address} holds {balance}, needs {needed}")]
    InsufficientBalance { address: Address, balance: Amount, needed: Amount },
    #[error("unknown contract code {code_id:?}")]
    UnknownCode { code_id: String },
    #[error("transaction reverted: {reason}")]
    Reverted { reason: String },
    #[error("ledger unavailable: {reason}")]
    Unavailable { reason: String },
    #[error("invalid request: {reason}")]
    Invalid { reason: String },
}

impl LedgerError {
    pub fn reverted(reason: impl Into<String>) -> Self {
        Self::Reverted { reason: reason.into() }
    }
}

/// Serializable copy of the whole chain, used by `inspect` and replay checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSnapshot {
    pub config: LedgerConfig,
    pub treasury: Address,
    pub accounts: Vec<Account>,
    pub blocks: Vec<Block>,
}

/// Account-based state machine with instant single-sealer finality.
///
/// Every accepted transaction is executed inside a freshly sealed block.
/// Reverted transactions are included (their nonce is consumed and the
/// receipt says `failed`) but leave no other trace: no balance or state
/// change and no events.
pub struct Ledger {
    config: LedgerConfig,
    accounts: Accounts,
    blocks: Vec<Block>,
    registry: Registry,
    clock: Arc<dyn Clock>,
    eoa_seeds: BTreeSet<u64>,
    treasury: Address,
}

impl Ledger {
    pub fn new(config: LedgerConfig, registry: Registry) -> Self {
        Self::with_clock(config, registry, Arc::new(VirtualClock::new()))
    }

    pub fn with_clock(config: LedgerConfig, registry: Registry, clock: Arc<dyn Clock>) -> Self {
        let treasury = Address::for_eoa_seed(config.treasury_seed);
        let mut accounts = Accounts::new();
        accounts.insert(treasury, Account::eoa(treasury, config.initial_supply));
        let genesis = Block { number: 0, timestamp: clock.now(), transactions: vec![], events: vec![] };
        Self {
            eoa_seeds: BTreeSet::from([config.treasury_seed]),
            config,
            accounts,
            blocks: vec![genesis],
            registry,
            clock,
            treasury,
        }
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// The EOA holding the genesis supply.
    pub fn treasury(&self) -> Address {
        self.treasury
    }

    pub fn create_eoa(&mut self, seed: u64) -> Result<Address, LedgerError> {
        let address = Address::for_eoa_seed(seed);
        if !self.eoa_seeds.insert(seed) || self.accounts.contains_key(&address) {
            return Err(LedgerError::AlreadyExists { address });
        }
        self.accounts.insert(address, Account::eoa(address, 0));
        Ok(address)
    }

    pub fn account(&self, address: &Address) -> Option<&Account> {
        self.accounts.get(address)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn balance_of(&self, address: &Address) -> Amount {
        self.accounts.get(address).map(|a| a.balance_link).unwrap_or(0)
    }

    pub fn total_supply(&self) -> Amount {
        self.config.initial_supply
    }

    /// Sum over all accounts, escrow held by contracts included.
    pub fn total_balance(&self) -> Amount {
        self.accounts.values().map(|a| a.balance_link).sum()
    }

    pub fn height(&self) -> u64 {
        self.blocks.len() as u64 - 1
    }

    pub fn block(&self, number: u64) -> Option<&Block> {
        self.blocks.get(number as usize)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn get_events(&self, filter: &EventFilter) -> Vec<Event> {
        self.blocks
            .iter()
            .skip(filter.from_block as usize)
            .flat_map(|b| b.events.iter())
            .filter(|e| filter.matches(e))
            .cloned()
            .collect()
    }

    pub fn snapshot(&self) -> ChainSnapshot {
        ChainSnapshot {
            config: self.config.clone(),
            treasury: self.treasury,
            accounts: self.accounts.values().cloned().collect(),
            blocks: self.blocks.clone(),
        }
    }

    pub fn submit_transaction(&mut self, tx: Transaction) -> Result<Receipt, LedgerError> {
        self.submit_batch(vec![tx]).pop().expect("one result per transaction")
    }

    /// Validate and execute `txs` in order inside a single new block. Rejected
    /// transactions are left out; if none is accepted no block is sealed.
    pub fn submit_batch(&mut self, txs: Vec<Transaction>) -> Vec<Result<Receipt, LedgerError>> {
        let number = self.blocks.len() as u64;
        let mut block = Block { number, timestamp: self.clock.now(), transactions: vec![], events: vec![] };
        let mut results = Vec::with_capacity(txs.len());
        for tx in txs {
            let result = self.validate(&tx).map(|()| self.execute(&mut block, tx));
            results.push(result);
        }
        if !block.transactions.is_empty() {
            self.blocks.push(block);
        }
        results
    }

    fn validate(&self, tx: &Transaction) -> Result<(), LedgerError> {
        let sender = self
            .accounts
            .get(&tx.from)
            .ok_or(LedgerError::UnknownAccount { address: tx.from })?;
        if sender.is_contract() {
            return Err(LedgerError::NotAnEoa { address: tx.from });
        }
        if sender.nonce != tx.nonce {
            return Err(LedgerError::BadNonce { address: tx.from, expected: sender.nonce, got: tx.nonce });
        }
        if sender.balance_link < tx.link_value {
            return Err(LedgerError::InsufficientBalance {
                address: tx.from,
                balance: sender.balance_link,
                needed: tx.link_value,
            });
        }
        match (&tx.to, &tx.call) {
            (Some(to), _) if !self.accounts.contains_key(to) => {
                Err(LedgerError::UnknownAccount { address: *to })
            }
            (None, None) => Err(LedgerError::Invalid { reason: "deployment without payload".into() }),
            (None, Some(call)) => {
                if call.function != DEPLOY_FN {
                    return Err(LedgerError::Invalid { reason: "transactions without `to` must deploy".into() });
                }
                let code_id = call.args.get("code_id").and_then(Value::as_str).unwrap_or_default();
                if self.registry.get(code_id).is_none() {
                    return Err(LedgerError::UnknownCode { code_id: code_id.to_string() });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn execute(&mut self, block: &mut Block, tx: Transaction) -> Receipt {
        let hash = tx.hash();
        let mut working = self.accounts.clone();
        let mut pending = Vec::new();
        let outcome = run(&mut working, &self.registry, &mut pending, &tx, block.number);
        let (status, output, contract_address, events) = match outcome {
            Ok((output, created)) => {
                self.accounts = working;
                let base = block.events.len() as u32;
                let events: Vec<Event> = pending
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| Event {
                        emitter: p.emitter,
                        topic: p.topic,
                        data: p.data,
                        block_number: block.number,
                        index_in_block: base + i as u32,
                    })
                    .collect();
                block.events.extend(events.iter().cloned());
                (TxStatus::Success, output, created, events)
            }
            Err(revert) => (TxStatus::Failed { reason: revert.0 }, Value::Null, None, vec![]),
        };
        // included transactions consume their nonce whatever the outcome
        self.accounts.get_mut(&tx.from).expect("validated sender").nonce += 1;
        block.transactions.push(SealedTx { hash: hash.clone(), tx, status: status.clone() });
        Receipt { tx_hash: hash, status, block_number: block.number, events, output, contract_address }
    }

    /// Execute a read-only call against current state; nothing is persisted.
    pub fn view(&self, to: &Address, function: &str, args: Value) -> Result<Value, LedgerError> {
        let mut scratch = self.accounts.clone();
        let mut events = Vec::new();
        invoke(
            &mut scratch,
            &self.registry,
            &mut events,
            Address::ZERO,
            Address::ZERO,
            *to,
            function,
            &args,
            0,
            self.height(),
            0,
        )
        .map_err(|r| LedgerError::reverted(r.0))
    }

    pub fn next_nonce(&self, address: &Address) -> Result<u64, LedgerError> {
        self.accounts
            .get(address)
            .map(|a| a.nonce)
            .ok_or(LedgerError::UnknownAccount { address: *address })
    }

    /// Submit a deployment and return the new contract address; a constructor
    /// revert becomes [`LedgerError::Reverted`].
    pub fn deploy_contract(&mut self, deployer: Address, code_id: &str, init: Value) -> Result<Address, LedgerError> {
        let nonce = self.next_nonce(&deployer)?;
        let receipt = self.submit_transaction(Transaction::deploy(deployer, nonce, code_id, init))?;
        match (receipt.status, receipt.contract_address) {
            (TxStatus::Success, Some(addr)) => Ok(addr),
            (TxStatus::Failed { reason }, _) => Err(LedgerError::Reverted { reason }),
            (TxStatus::Success, None) => unreachable!("successful deployment yields an address"),
        }
    }

    /// Submit a contract call using the sender's current nonce.
    pub fn call_contract(&mut self, from: Address, to: Address, function: &str, args: Value) -> Result<Receipt, LedgerError> {
        let nonce = self.next_nonce(&from)?;
        self.submit_transaction(Transaction::call(from, to, nonce, Call::new(function, args)))
    }

    /// Plain LINK transfer between accounts.
    pub fn transfer(&mut self, from: Address, to: Address, amount: Amount) -> Result<Receipt, LedgerError> {
        let nonce = self.next_nonce(&from)?;
        self.submit_transaction(Transaction::transfer(from, to, nonce, amount))
    }
}

fn run(
    accounts: &mut Accounts,
    registry: &Registry,
    events: &mut Vec<PendingEvent>,
    tx: &Transaction,
    block_number: u64,
) -> Result<(Value, Option<Address>), Revert> {
    match (&tx.to, &tx.call) {
        (Some(to), None) => {
            crate::require!(
                !accounts[to].is_contract(),
                "plain LINK transfers to contracts are not accepted"
            );
            move_link(accounts, &tx.from, to, tx.link_value)?;
            Ok((Value::Null, None))
        }
        (Some(to), Some(call)) => {
            let out = invoke(
                accounts, registry, events, tx.from, tx.from, *to, &call.function, &call.args, tx.link_value,
                block_number, 0,
            )?;
            Ok((out, None))
        }
        (None, Some(call)) => {
            let code_id = call.args.get("code_id").and_then(Value::as_str).unwrap_or_default();
            let code = registry.get(code_id).expect("validated code id");
            let address = Address::for_contract(&tx.from, tx.nonce);
            crate::require!(!accounts.contains_key(&address), "address collision at {address}");
            accounts.insert(
                address,
                Account {
                    address,
                    kind: AccountKind::Contract { code_id: code_id.to_string() },
                    balance_link: 0,
                    nonce: 0,
                    contract_state: KeyValue::new(),
                },
            );
            crate::require!(tx.link_value == 0, "deployments cannot carry LINK");
            let init = call.args.get("init").cloned().unwrap_or(Value::Null);
            let mut ctx = CallContext {
                accounts,
                registry,
                events,
                this: address,
                caller: tx.from,
                origin: tx.from,
                value: 0,
                block_number,
                depth: 0,
            };
            code.construct(&mut ctx, &init)?;
            Ok((Value::String(address.to_string()), Some(address)))
        }
        (None, None) => Err(Revert::new("empty transaction")),
    }
}
