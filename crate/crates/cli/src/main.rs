//! Command-line front end: run services, replay the scenario, audit and
//! inspect state.

mod commands;
mod inspect;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slice_integrity::harness::Mode;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CORRUPTED: u8 = 2;
pub const EXIT_UNAVAILABLE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "slice-integrity", version, about = "Network-slice configuration integrity toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one service in the foreground.
    Serve(serve::ServeArgs),
    /// Scenario runner.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// One-shot audits.
    #[command(subcommand)]
    Audit(AuditCommand),
    /// Oracle snapshot requests.
    #[command(subcommand)]
    Snapshot(SnapshotCommand),
    /// Print ledger, store or controller state as JSON.
    Inspect(inspect::InspectArgs),
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Snapshot, audit, tamper and audit again; prints the audit log lines.
    Run(ScenarioRunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Deterministic,
    Live,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Deterministic => Mode::Deterministic,
            ModeArg::Live => Mode::Live,
        }
    }
}

#[derive(Args)]
struct ScenarioRunArgs {
    /// Overrides the mode given in the config file.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Scenario config (JSON); missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the transcript (JSON lines) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep ledger, store and controller state here for `inspect`.
    #[arg(long)]
    state_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Run a single audit now. Exit code 0 = VERIFIED, 2 = CORRUPTED, 3 = UNAVAILABLE.
    Once(commands::AuditOnceArgs),
}

#[derive(Subcommand)]
enum SnapshotCommand {
    /// Ask the validator to request a new snapshot from the oracle.
    Request(commands::SnapshotArgs),
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Serve(args) => serve::run(args),
        Command::Scenario(ScenarioCommand::Run(args)) => commands::scenario_run(args),
        Command::Audit(AuditCommand::Once(args)) => commands::audit_once(args),
        Command::Snapshot(SnapshotCommand::Request(args)) => commands::snapshot_request(args),
        Command::Inspect(args) => inspect::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

pub type CliResult = Result<u8, Box<dyn std::error::Error>>;
