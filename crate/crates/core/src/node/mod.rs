//! Oracle node: job registry, event polling with a persisted cursor,
//! task pipelines and cron scheduling.

pub mod config;
pub mod cursor;
pub mod http;
pub mod job;
pub mod live;
mod oracle_node;
pub mod run;
pub mod schedule;
#[cfg(test)]
mod tests;

pub use config::{ConfigError, NodeConfigFile};
pub use cursor::{CursorStore, EventCursor, FileCursor, MemoryCursor};
pub use http::router;
pub use job::{InvalidSpec, JobSpec, TaskStep, Trigger};
pub use live::NodeRunner;
pub use oracle_node::{NodeError, NodeSettings, OracleNode};
pub use run::{JobRun, RunStatus};
pub use schedule::CronSchedule;
