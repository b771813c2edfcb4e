//! Under-approximating computation of `EG φ` through flattenings.

use alloc::vec::Vec;

use crate::ctl::{ApproxLabel, CheckResult};
use crate::flatten::{trace_inclusion_check, Flattening, FlatteningEnumerator, TraceCheck};
use crate::presburger::{simplify, Formula, PresburgerError};
use crate::reach::{forall_k_closure_monotone, pre_k_flat, pre_star, step_var, AccelError, FlatError, Session, Stop};
use crate::system::CounterSystem;

/// Result of an EG computation with the state set after every step.
#[derive(Clone, Debug)]
pub struct EgRun {
    pub result: CheckResult,
    pub history: Vec<Formula>,
}

/// Grows `X ⊆ EG φ` flattening by flattening, shortest first.
///
/// For each flattening `N` of `M₁ = refine(M, φ)`: `X ∨= pre*(N, X)`, then
/// `X ∨= ∀k ≥ 0. pre^k(N, φ)`. The run ends `precise` once `N` provably
/// exhibits every trace of `M₁` from `φ ∧ ¬X`, and `under` when the budget
/// or the length limit is reached. Flattenings with a cycle that cannot be
/// accelerated are skipped.
///
/// `M` must have no stuck states.
pub fn compute_global_under(m: &CounterSystem, phi: &Formula, session: &Session<'_>) -> Result<EgRun, Stop> {
    let mut x = Formula::False;
    let mut history = Vec::new();
    let out = run(m, phi, session, &mut x, &mut history);
    let label = match out {
        Ok(()) => ApproxLabel::Precise,
        Err(Stop::Forced) => {
            session.with_stats(|s| s.forced_stops += 1);
            ApproxLabel::Under
        }
        Err(Stop::Deadline) => return Err(Stop::Deadline),
    };
    Ok(EgRun { result: CheckResult::new(x, label, session.stats()), history })
}

fn run(
    m: &CounterSystem,
    phi: &Formula,
    session: &Session<'_>,
    x: &mut Formula,
    history: &mut Vec<Formula>,
) -> Result<(), Stop> {
    let solver = session.solver();
    let qe = |e: PresburgerError| session.stop_for(e);
    let phi = solver.normalize(phi).map_err(qe)?;
    if phi.is_false() {
        return Ok(());
    }
    let m1 = m.refine(&phi);
    let mut flats = FlatteningEnumerator::new(solver, &m1);
    let live = flats.live_transitions().to_vec();
    let live_part = m1.retain_transitions({
        let mut i = 0;
        move |_| {
            let keep = live.contains(&i);
            i += 1;
            keep
        }
    });
    // A flat system is its own best flattening; try it before enumerating.
    if let Some(n) = Flattening::identity(&live_part) {
        if step(&m1, &n, &phi, session, x, history)? {
            return Ok(());
        }
    }
    let max_len = session.budget().max_flattening_length;
    loop {
        session.check(0)?;
        if session.is_bounded() && flats.length() >= max_len {
            return Err(Stop::Forced);
        }
        let batch = flats.next_length();
        let len = flats.length();
        session.with_stats(|s| s.max_flattening_length = s.max_flattening_length.max(len));
        if batch.is_empty() && !flats.truncated() && len > m1.transitions().len() * 2 + 2 {
            // no flattening of this length or longer exists
            return Err(Stop::Forced);
        }
        for n in &batch {
            session.check(0)?;
            if step(&m1, n, &phi, session, x, history)? {
                return Ok(());
            }
        }
    }
}

/// Processes one flattening; `true` when the trace check succeeded.
fn step(
    m1: &CounterSystem,
    n: &Flattening,
    phi: &Formula,
    session: &Session<'_>,
    x: &mut Formula,
    history: &mut Vec<Formula>,
) -> Result<bool, Stop> {
    let solver = session.solver();
    let qe = |e: PresburgerError| session.stop_for(e);
    session.with_stats(|s| s.flattenings_explored += 1);

    if !x.is_false() {
        let sub = session.same();
        let back = pre_star(n.system(), &n.from_origin(x), &sub)?;
        session.absorb(&sub);
        let grown = Formula::or2(x.clone(), n.to_origin(&back.formula));
        *x = solver.normalize(&grown).map_err(qe)?;
        if back.label != ApproxLabel::Precise {
            return Err(Stop::Forced);
        }
    }

    match pre_k_flat(solver, n.system(), &n.from_origin(phi)) {
        Ok(pk) => {
            let k = step_var(n.system());
            let closed = forall_k_closure_monotone(solver, &pk, &k).map_err(qe)?;
            let grown = Formula::or2(x.clone(), n.to_origin(&closed));
            *x = solver.normalize(&grown).map_err(qe)?;
        }
        Err(FlatError::Accel(AccelError::Presburger(e))) => return Err(qe(e)),
        Err(_) => {
            session.with_stats(|s| s.flattenings_skipped += 1);
            return Ok(false);
        }
    }
    history.push(x.clone());

    let rest = simplify(&Formula::and2(phi.clone(), Formula::not(x.clone())));
    let sub = session.same();
    let verdict = trace_inclusion_check(m1, n, &rest, &sub);
    session.absorb(&sub);
    if verdict == TraceCheck::Holds {
        return Ok(true);
    }
    if sub.out_of_time() {
        session.check(0)?;
    }
    Ok(false)
}
