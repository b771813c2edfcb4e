use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::time::Duration;

use crate::presburger::{PresburgerError, Solver, DEFAULT_NODE_LIMIT};

/// Monotonic time since some fixed origin.
pub trait Clock {
    fn elapsed(&self) -> Duration;
}

/// A clock that never advances; wall-clock limits never trigger.
#[derive(Clone, Copy, Debug, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

/// Resource limits of a checking run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Iterations of a single fixpoint loop.
    pub max_iterations: u64,
    pub wall_clock_limit: Duration,
    /// Nodes per decision-procedure call.
    pub qe_node_limit: u64,
    /// Longest flattening enumerated by the under-approximating EG routine.
    pub max_flattening_length: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_iterations: 200,
            wall_clock_limit: Duration::from_secs(60),
            qe_node_limit: DEFAULT_NODE_LIMIT,
            max_flattening_length: 6,
        }
    }
}

impl Budget {
    pub fn is_valid(&self) -> bool {
        self.max_iterations > 0
            && !self.wall_clock_limit.is_zero()
            && self.qe_node_limit > 0
            && self.max_flattening_length > 0
    }
}

/// Counters surfaced with every result.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Fixpoint iterations over all pre*/post* loops.
    pub iterations: u64,
    /// Iterations of the outer EG loops.
    pub eg_iterations: u64,
    pub qe_calls: u64,
    pub qe_nodes: u64,
    pub flattenings_explored: u64,
    pub flattenings_skipped: u64,
    pub max_flattening_length: usize,
    pub accelerations: u64,
    pub forced_stops: u64,
    pub notes: Vec<String>,
}

impl Stats {
    pub fn absorb(&mut self, other: &Stats) {
        self.iterations += other.iterations;
        self.eg_iterations += other.eg_iterations;
        self.qe_calls += other.qe_calls;
        self.qe_nodes += other.qe_nodes;
        self.flattenings_explored += other.flattenings_explored;
        self.flattenings_skipped += other.flattenings_skipped;
        self.max_flattening_length = self.max_flattening_length.max(other.max_flattening_length);
        self.accelerations += other.accelerations;
        self.forced_stops += other.forced_stops;
        for n in &other.notes {
            if !self.notes.contains(n) {
                self.notes.push(n.clone());
            }
        }
    }
}

/// Why a computation stopped before reaching its fixpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Budget of this call used up; the caller may return an approximation.
    Forced,
    /// The global wall clock expired while a precise answer was required.
    Deadline,
}

/// Budget bookkeeping shared by one checking call and its sub-calls.
///
/// A `Session` is either *bounded*, where iteration caps, node limits and
/// its own deadline apply and running out yields [`Stop::Forced`], or
/// *unbounded*, where only the global deadline applies and running out is
/// [`Stop::Deadline`].
pub struct Session<'c> {
    clock: &'c dyn Clock,
    budget: Budget,
    deadline: Duration,
    global_deadline: Duration,
    bounded: bool,
    solver: Solver<'c>,
    stats: RefCell<Stats>,
}

impl<'c> Session<'c> {
    pub fn new(clock: &'c dyn Clock, budget: Budget) -> Session<'c> {
        let deadline = clock.elapsed().saturating_add(budget.wall_clock_limit);
        Session::make(clock, budget, deadline, deadline, true)
    }

    fn make(clock: &'c dyn Clock, budget: Budget, deadline: Duration, global: Duration, bounded: bool) -> Session<'c> {
        let stop_at = if bounded { deadline.min(global) } else { global };
        let limit = if bounded { budget.qe_node_limit } else { u64::MAX };
        let solver = Solver::new(limit).with_interrupt(move || clock.elapsed() >= stop_at);
        Session {
            clock,
            budget,
            deadline: stop_at,
            global_deadline: global,
            bounded,
            solver,
            stats: RefCell::new(Stats::default()),
        }
    }

    /// A bounded sub-session owning `num/den` of the remaining time.
    pub fn share(&self, num: u32, den: u32) -> Session<'c> {
        let now = self.clock.elapsed();
        let left = self.deadline.saturating_sub(now);
        let part = left.checked_mul(num).map_or(left, |d| d / den.max(1));
        Session::make(self.clock, self.budget, now.saturating_add(part), self.global_deadline, true)
    }

    /// A sub-session limited only by the global deadline.
    pub fn unbounded(&self) -> Session<'c> {
        Session::make(self.clock, self.budget, self.global_deadline, self.global_deadline, false)
    }

    /// A sub-session with the same limits as this one.
    pub fn same(&self) -> Session<'c> {
        Session::make(self.clock, self.budget, self.deadline, self.global_deadline, self.bounded)
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn solver(&self) -> &Solver<'c> {
        &self.solver
    }

    pub fn clock(&self) -> &'c dyn Clock {
        self.clock
    }

    pub fn elapsed(&self) -> Duration {
        self.clock.elapsed()
    }

    pub fn out_of_time(&self) -> bool {
        self.clock.elapsed() >= self.deadline
    }

    /// Whether a fixpoint loop that has run `iterations` rounds must stop.
    pub fn check(&self, iterations: u64) -> Result<(), Stop> {
        if self.out_of_time() {
            return Err(self.stop());
        }
        if self.bounded && iterations >= self.budget.max_iterations {
            return Err(Stop::Forced);
        }
        Ok(())
    }

    /// The stop kind for a failed decision-procedure call.
    pub fn stop_for(&self, _e: PresburgerError) -> Stop {
        self.stop()
    }

    fn stop(&self) -> Stop {
        if self.bounded {
            Stop::Forced
        } else {
            Stop::Deadline
        }
    }

    pub fn with_stats<R>(&self, f: impl FnOnce(&mut Stats) -> R) -> R {
        f(&mut self.stats.borrow_mut())
    }

    pub fn note(&self, msg: impl Into<String>) {
        let msg = msg.into();
        let mut st = self.stats.borrow_mut();
        if !st.notes.contains(&msg) {
            st.notes.push(msg);
        }
    }

    /// Statistics so far, including decision-procedure counters.
    pub fn stats(&self) -> Stats {
        let mut s = self.stats.borrow().clone();
        s.qe_calls += self.solver.calls();
        s.qe_nodes += self.solver.total_nodes();
        s
    }

    /// Folds a finished sub-session's statistics into this one.
    pub fn absorb(&self, child: &Session<'_>) {
        self.stats.borrow_mut().absorb(&child.stats());
    }

    pub fn absorb_stats(&self, s: &Stats) {
        self.stats.borrow_mut().absorb(s);
    }
}
