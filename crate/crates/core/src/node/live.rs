use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::oracle_node::OracleNode;
use crate::clock::Clock;

const MAX_BACKOFF: Duration = Duration::from_secs(5);

/// Background dispatcher for live mode: polls the ledger and ticks cron
/// jobs against a real clock, backing off while the ledger is unreachable.
pub struct NodeRunner {
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl NodeRunner {
    pub fn spawn(node: Arc<Mutex<OracleNode>>, clock: Arc<dyn Clock>, poll_every: Duration) -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let thread = thread::Builder::new()
            .name("oracle-node".into())
            .spawn(move || {
                let mut wait = poll_every;
                while !flag.load(Ordering::SeqCst) {
                    {
                        let mut node = node.lock().unwrap();
                        match node.poll_and_dispatch() {
                            Ok(_) => wait = poll_every,
                            Err(e) => {
                                wait = (wait * 2).min(MAX_BACKOFF);
                                tracing::warn!(error = %e, retry_in = ?wait, "poll failed");
                            }
                        }
                        node.tick(clock.now());
                    }
                    let until = Instant::now() + wait;
                    while Instant::now() < until && !flag.load(Ordering::SeqCst) {
                        thread::sleep(Duration::from_millis(5).min(wait));
                    }
                }
            })
            .expect("spawn node thread");
        Self { stop, thread: Some(thread) }
    }

    pub fn stop(mut self) {
        self.halt();
    }

    fn halt(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for NodeRunner {
    fn drop(&mut self) {
        self.halt();
    }
}
