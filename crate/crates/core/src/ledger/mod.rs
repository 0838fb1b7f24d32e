//! Minimal account-based ledger: EOAs and contract accounts, LINK balances,
//! instantly sealed blocks and an ordered event log.

mod address;
mod chain;
mod client;
mod exec;
pub mod http;
mod types;

pub use address::{sha256, Address, AddressParseError};
pub use chain::{ChainSnapshot, Ledger, LedgerConfig, LedgerError};
pub use client::{LedgerClient, LocalLedger};
pub use exec::{args, CallContext, ContractCode, Registry, Revert, TOKEN_AUTHORITY_CODE};
pub use types::{
    Account, AccountKind, Amount, Block, Call, Event, EventFilter, KeyValue, Receipt, SealedTx,
    Transaction, TxStatus, DEPLOY_FN,
};
