//! Local content-addressed object store with IPFS-compatible CIDv0 names.
//!
//! Objects are addressed by the SHA-256 multihash of their raw bytes (no
//! chunking or DAG wrapping), base58btc encoded, so every identifier is a
//! 46-character `Qm...` string.

mod cid;
pub mod http;
mod store;

pub use cid::{cid_of, Cid, CidError, BASE58_ALPHABET, CID_TEXT_LEN, MULTIHASH_LEN};
pub use store::{ContentStore, ObjectStore, StoreError, StoredObject};
