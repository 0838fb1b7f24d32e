//! Contract behaviours executed by the ledger: the LINK token, the oracle
//! gateway (request / fulfill with escrowed payment) and the validator that
//! anchors a slice configuration's CID on chain.

mod link;
mod oracle;
mod validator;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical::to_canonical_bytes;
use crate::clock::Clock;
use crate::ledger::{sha256, Address, Ledger, LedgerConfig, Registry};

pub use link::LinkToken;
pub use oracle::{Oracle, OracleRequest, OracleState, DEFAULT_MIN_PAYMENT};
pub use validator::{Validator, ValidatorState, STORE_HASH_CALLBACK};

pub const LINK_TOKEN: &str = "link_token";
pub const ORACLE: &str = "oracle";
pub const VALIDATOR: &str = "validator";

pub const ORACLE_REQUEST_TOPIC: &str = "OracleRequest";
pub const ORACLE_FULFILLED_TOPIC: &str = "OracleFulfilled";
pub const HASH_STORED_TOPIC: &str = "HashStored";
pub const TRANSFER_TOPIC: &str = "Transfer";
pub const AUTHORIZATION_TOPIC: &str = "AuthorizationChanged";

/// Registry holding the three standard behaviours.
pub fn standard_registry() -> Registry {
    let mut r = Registry::new();
    r.register(Arc::new(LinkToken));
    r.register(Arc::new(Oracle));
    r.register(Arc::new(Validator));
    r
}

impl Ledger {
    pub fn standard(config: LedgerConfig) -> Self {
        Ledger::new(config, standard_registry())
    }

    pub fn standard_with_clock(config: LedgerConfig, clock: Arc<dyn Clock>) -> Self {
        Ledger::with_clock(config, standard_registry(), clock)
    }
}

/// Oracle request identifier:
/// `sha256(canonical_json([requester, counter, job_id]))`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RequestId([u8; 32]);

impl RequestId {
    pub fn compute(requester: &Address, counter: u64, job_id: &str) -> Self {
        let encoded = to_canonical_bytes(&(requester, counter, job_id));
        Self(sha256(&encoded))
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RequestId({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid request id {0:?}")]
pub struct RequestIdParseError(String);

impl FromStr for RequestId {
    type Err = RequestIdParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("0x").ok_or_else(|| RequestIdParseError(s.into()))?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(digits, &mut out).map_err(|_| RequestIdParseError(s.into()))?;
        Ok(Self(out))
    }
}

impl Serialize for RequestId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RequestId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
