use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use clap::{Args, ValueEnum};
use slice_integrity::adapters::{
    self, AdapterService, AuditSink, AuditorAdapter, IpfsPinAdapter, MemoryAuditLog, StdoutAuditLog, TeeAuditSink,
};
use slice_integrity::clock::{Clock, WallClock};
use slice_integrity::content_store::http::HttpObjectStore;
use slice_integrity::content_store::{self, ContentStore};
use slice_integrity::ledger::{self, Ledger, LedgerConfig, LocalLedger};
use slice_integrity::net::ServerHandle;
use slice_integrity::node::{self, NodeConfigFile, NodeRunner};
use slice_integrity::slicing::{self, HttpController, LocalSliceApi, SlicingController};

use crate::CliResult;

#[derive(Clone, Copy, ValueEnum)]
pub enum Component {
    Controller,
    Ledger,
    Store,
    Adapters,
    Node,
}

impl Component {
    fn default_port(self) -> u16 {
        match self {
            Component::Controller => 8080,
            Component::Ledger => 8545,
            Component::Store => 5001,
            Component::Adapters => 8081,
            Component::Node => 6688,
        }
    }
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(value_enum)]
    component: Component,
    /// Listen address; port 0 picks a free port. Defaults per component.
    #[arg(long)]
    addr: Option<SocketAddr>,
    /// Persist state here (controller and store).
    #[arg(long)]
    state_dir: Option<PathBuf>,
    /// Wall-clock length of one tick.
    #[arg(long, default_value_t = 1000)]
    tick_ms: u64,
    /// Ledger: LINK minted to the treasury at genesis.
    #[arg(long, default_value_t = 1_000_000)]
    initial_supply: u64,
    /// Ledger: artificial delay before each transaction is sealed.
    #[arg(long, default_value_t = 0)]
    seal_delay_ms: u64,
    /// Store: capacity in bytes.
    #[arg(long)]
    max_bytes: Option<usize>,
    /// Adapters: slicing controller base URL.
    #[arg(long, env = "CONTROLLER_URL", default_value = "http://127.0.0.1:8080")]
    controller_url: String,
    /// Adapters: content store base URL.
    #[arg(long, env = "STORE_URL", default_value = "http://127.0.0.1:5001")]
    store_url: String,
    /// Node: configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(args: ServeArgs) -> CliResult {
    let addr = args
        .addr
        .unwrap_or_else(|| SocketAddr::from(([127, 0, 0, 1], args.component.default_port())));
    let mut tick_ms = args.tick_ms.max(1);
    let mut runner = None;
    let router = match args.component {
        Component::Controller => {
            let clock = Arc::new(WallClock::new(Duration::from_millis(tick_ms)));
            let controller = match &args.state_dir {
                Some(dir) => SlicingController::open(dir, clock)?,
                None => SlicingController::with_clock(clock),
            };
            slicing::router(LocalSliceApi::new(Arc::new(controller)))
        }
        Component::Ledger => {
            let clock = Arc::new(WallClock::new(Duration::from_millis(tick_ms)));
            let config = LedgerConfig { initial_supply: args.initial_supply, treasury_seed: 0 };
            let chain = LocalLedger::new(Ledger::standard_with_clock(config, clock));
            ledger::http::router(chain, Duration::from_millis(args.seal_delay_ms))
        }
        Component::Store => {
            let store = match &args.state_dir {
                Some(dir) => ContentStore::open(dir, args.max_bytes)?,
                None => match args.max_bytes {
                    Some(n) => ContentStore::with_capacity(n),
                    None => ContentStore::new(),
                },
            };
            content_store::http::router(Arc::new(store))
        }
        Component::Adapters => {
            let clock = Arc::new(WallClock::new(Duration::from_millis(tick_ms)));
            let slices = Arc::new(HttpController::new(&args.controller_url));
            let log = MemoryAuditLog::new();
            let sink: Arc<dyn AuditSink> = Arc::new(TeeAuditSink(vec![Arc::new(StdoutAuditLog), Arc::new(log.clone())]));
            adapters::router(AdapterService {
                pin: IpfsPinAdapter::new(slices.clone(), Arc::new(HttpObjectStore::new(&args.store_url))),
                auditor: AuditorAdapter::new(slices, sink, clock),
                log: Some(log),
            })
        }
        Component::Node => {
            let path = args.config.as_ref().ok_or("serve node needs --config <file>")?;
            let file = NodeConfigFile::load(path)?;
            tick_ms = file.tick_ms.max(1);
            let clock: Arc<dyn Clock> = Arc::new(WallClock::new(Duration::from_millis(tick_ms)));
            let node = Arc::new(Mutex::new(file.build(clock.clone())?));
            runner = Some(NodeRunner::spawn(node.clone(), clock, Duration::from_millis(file.poll_ms.max(1))));
            node::router(node)
        }
    };
    let server = ServerHandle::spawn(router, addr)?;
    println!("listening on {}", server.url());
    std::io::stdout().flush()?;
    let _keep = (server, runner);
    loop {
        std::thread::park();
    }
}
