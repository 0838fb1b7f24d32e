use serde::{Deserialize, Serialize};

use crate::clock::Tick;

/// Boundary-aligned cron schedule. Boundaries are `origin + k * interval`;
/// a tick that skips several boundaries fires once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CronSchedule {
    pub interval_ticks: Tick,
    pub origin: Tick,
    pub last_fired: Tick,
}

impl CronSchedule {
    pub fn new(interval_ticks: Tick, origin: Tick) -> Self {
        assert!(interval_ticks >= 1, "cron interval must be positive");
        Self { interval_ticks, origin, last_fired: origin }
    }

    pub fn next_due(&self) -> Tick {
        self.last_fired + self.interval_ticks
    }

    /// Returns true (and records the latest boundary) when `now` has reached
    /// the next boundary.
    pub fn fire(&mut self, now: Tick) -> bool {
        if now < self.next_due() {
            return false;
        }
        let elapsed = now - self.origin;
        self.last_fired = self.origin + elapsed / self.interval_ticks * self.interval_ticks;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ten_tick_interval_over_35_ticks() {
        let mut s = CronSchedule::new(10, 0);
        let fired: Vec<Tick> = (0..=35).filter(|&t| s.fire(t)).collect();
        assert_eq!(fired, vec![10, 20, 30]);
    }

    #[test]
    fn jumps_coalesce() {
        let mut s = CronSchedule::new(10, 0);
        assert!(s.fire(10));
        assert!(s.fire(45));
        assert_eq!(s.last_fired, 40);
        assert!(!s.fire(49));
        assert!(s.fire(50));
    }

    #[test]
    fn backwards_is_ignored() {
        let mut s = CronSchedule::new(10, 0);
        assert!(s.fire(20));
        assert!(!s.fire(5));
        assert!(!s.fire(20));
    }

    proptest! {
        #[test]
        fn fires_floor_elapsed_over_interval(interval in 1u64..20, origin in 0u64..50, span in 0u64..300) {
            let mut s = CronSchedule::new(interval, origin);
            let fired = (origin..=origin + span).filter(|&t| s.fire(t)).count() as u64;
            prop_assert_eq!(fired, span / interval);
        }

        #[test]
        fn coalesced_fires_stay_within_one_interval(interval in 1u64..20, steps in prop::collection::vec(1u64..40, 1..30)) {
            let mut s = CronSchedule::new(interval, 0);
            let mut now = 0;
            for d in steps {
                now += d;
                let due = s.next_due();
                let fired = s.fire(now);
                prop_assert_eq!(fired, now >= due);
                prop_assert!(now - s.last_fired < interval || !fired);
            }
        }
    }
}
