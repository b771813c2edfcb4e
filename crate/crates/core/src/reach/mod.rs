//! Reachability: budgets, cycle acceleration, pre*/post*, exact-step
//! predecessors on flat systems.

mod accel;
mod fixpoint;
mod flat;
mod session;

pub use accel::{accelerate_all, accelerate_cycle, AccelError, AcceleratedCycle};
pub use fixpoint::{post_star, pre_star, CYCLE_LIMIT};
pub use flat::{forall_k_closure, forall_k_closure_monotone, pre_k_flat, step_var, FlatError};
pub use session::{Budget, Clock, FrozenClock, Session, Stats, Stop};
