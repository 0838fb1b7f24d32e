//! Scenario orchestration: wires every service together, in-process or over
//! HTTP, and replays the snapshot / audit / tamper use case.

pub mod config;
pub mod live;
pub mod scenario;
pub mod stack;
pub mod transcript;

pub use config::{Mode, ScenarioConfig, DEFAULT_TENANT_ID};
pub use live::LiveStack;
pub use scenario::{run_scenario, run_scenario_in, ScenarioError, Stage, CHAIN_FILE, TRANSCRIPT_FILE};
pub use stack::{
    audit_job, deploy, snapshot_job, Deployment, LocalStack, StackError, AUDIT_BRIDGE, AUDIT_JOB, NODE_SEED, PIN_BRIDGE,
    SNAPSHOT_JOB,
};
pub use transcript::{Transcript, TranscriptEntry};
