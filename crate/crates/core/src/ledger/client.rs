use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use serde_json::Value;

use super::address::Address;
use super::chain::{ChainSnapshot, Ledger, LedgerError};
use super::types::{Account, Amount, Block, Call, Event, EventFilter, Receipt, Transaction, TxStatus};

/// Operations the node, the harness and the CLI need from a ledger, whether
/// it runs in-process or behind the JSON-RPC endpoint.
pub trait LedgerClient: Send + Sync {
    fn submit_transaction(&self, tx: Transaction) -> Result<Receipt, LedgerError>;
    fn get_events(&self, filter: &EventFilter) -> Result<Vec<Event>, LedgerError>;
    fn get_account(&self, address: &Address) -> Result<Option<Account>, LedgerError>;
    fn get_block(&self, number: u64) -> Result<Option<Block>, LedgerError>;
    fn height(&self) -> Result<u64, LedgerError>;
    fn call_view(&self, to: &Address, function: &str, args: Value) -> Result<Value, LedgerError>;
    fn create_eoa(&self, seed: u64) -> Result<Address, LedgerError>;
    fn snapshot(&self) -> Result<ChainSnapshot, LedgerError>;

    fn next_nonce(&self, address: &Address) -> Result<u64, LedgerError> {
        self.get_account(address)?
            .map(|a| a.nonce)
            .ok_or(LedgerError::UnknownAccount { address: *address })
    }

    /// Submit a call with the sender's current nonce and return the receipt,
    /// whatever its status.
    fn send_call(&self, from: Address, to: Address, function: &str, args: Value) -> Result<Receipt, LedgerError> {
        let nonce = self.next_nonce(&from)?;
        self.submit_transaction(Transaction::call(from, to, nonce, Call::new(function, args)))
    }

    /// Like [`send_call`](Self::send_call) but turns a failed receipt into
    /// [`LedgerError::Reverted`].
    fn execute(&self, from: Address, to: Address, function: &str, args: Value) -> Result<Receipt, LedgerError> {
        let receipt = self.send_call(from, to, function, args)?;
        match &receipt.status {
            TxStatus::Success => Ok(receipt),
            TxStatus::Failed { reason } => Err(LedgerError::reverted(reason.clone())),
        }
    }

    fn deploy(&self, deployer: Address, code_id: &str, init: Value) -> Result<Address, LedgerError> {
        let nonce = self.next_nonce(&deployer)?;
        let receipt = self.submit_transaction(Transaction::deploy(deployer, nonce, code_id, init))?;
        match receipt.status {
            TxStatus::Success => receipt
                .contract_address
                .ok_or_else(|| LedgerError::Invalid { reason: "deployment receipt without address".into() }),
            TxStatus::Failed { reason } => Err(LedgerError::Reverted { reason }),
        }
    }

    fn transfer(&self, from: Address, to: Address, amount: Amount) -> Result<Receipt, LedgerError> {
        let nonce = self.next_nonce(&from)?;
        self.submit_transaction(Transaction::transfer(from, to, nonce, amount))
    }
}

/// Shared in-process ledger. Writers are serialized by the lock; readers see
/// only sealed state.
#[derive(Clone)]
pub struct LocalLedger {
    inner: Arc<RwLock<Ledger>>,
}

impl LocalLedger {
    pub fn new(ledger: Ledger) -> Self {
        Self { inner: Arc::new(RwLock::new(ledger)) }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Ledger> {
        self.inner.read().unwrap()
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Ledger> {
        self.inner.write().unwrap()
    }
}

impl LedgerClient for LocalLedger {
    fn submit_transaction(&self, tx: Transaction) -> Result<Receipt, LedgerError> {
        self.write().submit_transaction(tx)
    }

    fn get_events(&self, filter: &EventFilter) -> Result<Vec<Event>, LedgerError> {
        Ok(self.read().get_events(filter))
    }

    fn get_account(&self, address: &Address) -> Result<Option<Account>, LedgerError> {
        Ok(self.read().account(address).cloned())
    }

    fn get_block(&self, number: u64) -> Result<Option<Block>, LedgerError> {
        Ok(self.read().block(number).cloned())
    }

    fn height(&self) -> Result<u64, LedgerError> {
        Ok(self.read().height())
    }

    fn call_view(&self, to: &Address, function: &str, args: Value) -> Result<Value, LedgerError> {
        self.read().view(to, function, args)
    }

    fn create_eoa(&self, seed: u64) -> Result<Address, LedgerError> {
        self.write().create_eoa(seed)
    }

    fn snapshot(&self) -> Result<ChainSnapshot, LedgerError> {
        Ok(self.read().snapshot())
    }
}

impl<T: LedgerClient + ?Sized> LedgerClient for Arc<T> {
    fn submit_transaction(&self, tx: Transaction) -> Result<Receipt, LedgerError> {
        (**self).submit_transaction(tx)
    }
    fn get_events(&self, filter: &EventFilter) -> Result<Vec<Event>, LedgerError> {
        (**self).get_events(filter)
    }
    fn get_account(&self, address: &Address) -> Result<Option<Account>, LedgerError> {
        (**self).get_account(address)
    }
    fn get_block(&self, number: u64) -> Result<Option<Block>, LedgerError> {
        (**self).get_block(number)
    }
    fn height(&self) -> Result<u64, LedgerError> {
        (**self).height()
    }
    fn call_view(&self, to: &Address, function: &str, args: Value) -> Result<Value, LedgerError> {
        (**self).call_view(to, function, args)
    }
    fn create_eoa(&self, seed: u64) -> Result<Address, LedgerError> {
        (**self).create_eoa(seed)
    }
    fn snapshot(&self) -> Result<ChainSnapshot, LedgerError> {
        (**self).snapshot()
    }
}
