//! Integrity verification for network-slice configurations.
//!
//! A mock slicing controller serves tenant/slice documents; an oracle node,
//! driven by events on a small simulated ledger, snapshots those documents
//! into a content-addressed store and anchors the resulting CID in a
//! validator contract; a cron-scheduled auditor later recomputes the CID of
//! the live document and reports whether it still matches.

pub mod adapters;
pub mod canonical;
pub mod clock;
pub mod content_store;
pub mod contracts;
pub mod harness;
pub mod ledger;
pub mod net;
pub mod node;
pub mod slicing;
