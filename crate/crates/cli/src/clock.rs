use std::time::{Duration, Instant};

use counterctl_core::reach::Clock;

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    start: Instant,
}

impl StdClock {
    pub fn start() -> StdClock {
        StdClock { start: Instant::now() }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        StdClock::start()
    }
}

impl Clock for StdClock {
    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}
