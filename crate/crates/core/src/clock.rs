//! Tick-based time shared by every component.
//!
//! Deterministic mode drives a [`VirtualClock`] by hand; live mode uses a
//! [`WallClock`] where one tick is a configurable number of milliseconds
//! (1000 by default, so one tick is one second).

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

pub type Tick = u64;

pub trait Clock: Send + Sync {
    fn now(&self) -> Tick;
}

#[derive(Debug, Default)]
pub struct VirtualClock {
    now: AtomicU64,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Move to `tick`. Moving backwards is ignored; returns the resulting time.
    pub fn advance_to(&self, tick: Tick) -> Tick {
        self.now.fetch_max(tick, Ordering::SeqCst).max(tick)
    }

    pub fn advance_by(&self, delta: Tick) -> Tick {
        self.now.fetch_add(delta, Ordering::SeqCst) + delta
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> Tick {
        self.now.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone)]
pub struct WallClock {
    start: Instant,
    tick: Duration,
}

impl WallClock {
    pub fn new(tick: Duration) -> Self {
        assert!(!tick.is_zero(), "tick duration must be positive");
        Self { start: Instant::now(), tick }
    }

    pub fn seconds() -> Self {
        Self::new(Duration::from_secs(1))
    }

    pub fn tick_duration(&self) -> Duration {
        self.tick
    }
}

impl Clock for WallClock {
    fn now(&self) -> Tick {
        (self.start.elapsed().as_nanos() / self.tick.as_nanos()) as Tick
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_clock_never_goes_back() {
        let c = VirtualClock::new();
        assert_eq!(c.advance_to(10), 10);
        assert_eq!(c.advance_to(4), 10);
        assert_eq!(c.now(), 10);
        assert_eq!(c.advance_by(5), 15);
    }

    #[test]
    fn wall_clock_starts_at_zero() {
        let c = WallClock::new(Duration::from_secs(3600));
        assert_eq!(c.now(), 0);
    }
}
