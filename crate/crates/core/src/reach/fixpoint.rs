//! pre* and post* by frontier iteration with cycle acceleration.

use alloc::vec::Vec;

use super::accel::{accelerate_all, AcceleratedCycle};
use super::session::{Session, Stop};
use crate::ctl::{ApproxLabel, CheckResult};
use crate::presburger::{Formula, PresburgerError};
use crate::system::CounterSystem;

/// Upper bound on simple cycles considered for acceleration.
pub const CYCLE_LIMIT: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Direction {
    Backward,
    Forward,
}

/// States from which `phi` is reachable in zero or more steps.
///
/// Labelled `precise` when the fixpoint is reached and `under` when the
/// session's budget stops the iteration first.
pub fn pre_star(m: &CounterSystem, phi: &Formula, session: &Session<'_>) -> Result<CheckResult, Stop> {
    star(m, phi, session, Direction::Backward)
}

/// States reachable from `phi` in zero or more steps. Labels as for
/// [`pre_star`].
pub fn post_star(m: &CounterSystem, phi: &Formula, session: &Session<'_>) -> Result<CheckResult, Stop> {
    star(m, phi, session, Direction::Forward)
}

fn star(m: &CounterSystem, phi: &Formula, session: &Session<'_>, dir: Direction) -> Result<CheckResult, Stop> {
    let before = session.stats();
    let mut iterations = 0u64;
    let mut reached = Formula::False;
    let outcome = run(m, phi, session, dir, &mut iterations, &mut reached);
    session.with_stats(|s| s.iterations += iterations);
    let mut stats = session.stats();
    stats.iterations -= before.iterations;
    stats.qe_calls -= before.qe_calls;
    stats.qe_nodes -= before.qe_nodes;
    match outcome {
        Ok(()) => Ok(CheckResult::new(reached, ApproxLabel::Precise, stats)),
        Err(Stop::Forced) => {
            session.with_stats(|s| s.forced_stops += 1);
            stats.forced_stops += 1;
            Ok(CheckResult::new(reached, ApproxLabel::Under, stats))
        }
        Err(Stop::Deadline) => Err(Stop::Deadline),
    }
}

fn run(
    m: &CounterSystem,
    phi: &Formula,
    session: &Session<'_>,
    dir: Direction,
    iterations: &mut u64,
    reached: &mut Formula,
) -> Result<(), Stop> {
    let solver = session.solver();
    let qe = |e: PresburgerError| session.stop_for(e);
    *reached = phi.clone();
    let start = solver.normalize(phi).map_err(qe)?;
    *reached = start.clone();
    if start.is_false() {
        return Ok(());
    }
    let (accels, _) = accelerate_all(solver, m, CYCLE_LIMIT).map_err(qe)?;
    session.with_stats(|s| s.accelerations += accels.len() as u64);
    let mut frontier = start;
    loop {
        session.check(*iterations)?;
        *iterations += 1;
        let image = step(m, &accels, &frontier, session, dir)?;
        let fresh = solver.new_disjuncts(&image, reached).map_err(qe)?;
        if fresh.is_empty() {
            return Ok(());
        }
        frontier = Formula::or(fresh);
        let grown = Formula::or2(reached.clone(), frontier.clone());
        *reached = solver.normalize(&grown).unwrap_or(grown);
    }
}

fn step(
    m: &CounterSystem,
    accels: &[AcceleratedCycle],
    frontier: &Formula,
    session: &Session<'_>,
    dir: Direction,
) -> Result<Formula, Stop> {
    let solver = session.solver();
    let qe = |e: PresburgerError| session.stop_for(e);
    let mut parts = Vec::with_capacity(accels.len() + 1);
    parts.push(match dir {
        Direction::Backward => m.pre_image(solver, frontier),
        Direction::Forward => m.post_image(solver, frontier),
    }
    .map_err(qe)?);
    for a in accels {
        parts.push(match dir {
            Direction::Backward => a.pre(solver, frontier, None),
            Direction::Forward => a.post(solver, frontier),
        }
        .map_err(qe)?);
    }
    Ok(Formula::or(parts))
}
