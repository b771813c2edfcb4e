//! Over-approximating computation of `EG φ` by growing a set of states that
//! provably violate it.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::ctl::{ApproxLabel, CheckResult};
use crate::eg_under::EgRun;
use crate::presburger::{fresh_var, simplify, Formula, LinearTerm, PresburgerError, Result as QeResult, Solver, Var};
use crate::reach::{pre_star, Session, Stop};
use crate::system::{CounterSystem, Transition, Update};

/// States outside `Y` all of whose successors are in `Y` (states without
/// successors included): `¬pre(¬Y) ∧ ¬Y`.
pub fn grow1(solver: &Solver<'_>, m1: &CounterSystem, y: &Formula) -> QeResult<Formula> {
    let not_y = Formula::not(y.clone());
    let pre = m1.pre_image(solver, &not_y)?;
    solver.normalize(&Formula::and2(Formula::not(pre), not_y))
}

/// Successor of the current state through `t`: the control and a term per
/// counter; range updates get fresh variables with their bounds.
fn successor(t: &Transition, counters: &[Var], taken: &mut BTreeSet<Var>) -> (Vec<LinearTerm>, Vec<Formula>, Vec<Var>) {
    let mut terms = Vec::new();
    let mut side = Vec::new();
    let mut fresh = Vec::new();
    for c in counters {
        match t.update(c) {
            None => terms.push(LinearTerm::var(c.clone())),
            Some(Update::Assign(e)) => terms.push(e.clone()),
            Some(Update::Range(lo, hi)) => {
                let r = fresh_var(&c.primed(), taken);
                taken.insert(r.clone());
                let rt = LinearTerm::var(r.clone());
                side.push(Formula::le(lo, &rt));
                side.push(Formula::le(&rt, hi));
                terms.push(rt);
                fresh.push(r);
            }
        }
    }
    (terms, side, fresh)
}

/// States with at least two distinct successors outside `Y`; the negation
/// of "at most one successor outside `Y`".
pub fn more_than_one_succ_outside(solver: &Solver<'_>, m1: &CounterSystem, y: &Formula) -> QeResult<Formula> {
    let counters = m1.counters();
    let ts = m1.transitions();
    let q = Var::control();
    let not_y = Formula::not(y.clone());
    let mut parts = Vec::new();
    for i in 0..ts.len() {
        for j in i..ts.len() {
            let (a, b) = (&ts[i], &ts[j]);
            if a.source() != b.source() || (i == j && a.is_functional()) {
                continue;
            }
            let mut taken = y.all_vars();
            taken.extend(counters.iter().cloned());
            let (ta, sa, fa) = successor(a, counters, &mut taken);
            let (tb, sb, fb) = successor(b, counters, &mut taken);
            let at = |target: u32, terms: &[LinearTerm]| {
                let mut map: alloc::collections::BTreeMap<Var, LinearTerm> =
                    counters.iter().cloned().zip(terms.iter().cloned()).collect();
                map.insert(q.clone(), LinearTerm::constant(target));
                not_y.substitute(&map)
            };
            let differ = if a.target() != b.target() {
                Formula::True
            } else {
                Formula::or(ta.iter().zip(&tb).map(|(u, v)| Formula::ne(u, v)))
            };
            let mut conj = alloc::vec![
                a.guard().clone(),
                b.guard().clone(),
                differ,
                at(a.target(), &ta),
                at(b.target(), &tb),
            ];
            conj.extend(sa);
            conj.extend(sb);
            let body = Formula::and(conj);
            let mut fresh = fa;
            fresh.extend(fb);
            parts.push(if fresh.is_empty() { body } else { solver.project(&fresh, &body)? });
        }
    }
    solver.normalize(&Formula::or(parts))
}

/// States with at most one successor outside `Y`.
pub fn atmost_one_succ_outside(solver: &Solver<'_>, m1: &CounterSystem, y: &Formula) -> QeResult<Formula> {
    Ok(simplify(&Formula::not(more_than_one_succ_outside(solver, m1, y)?)))
}

/// `¬pre*(¬atmost_one) ∧ pre*(grow1)`; `false` when either reachability
/// query is stopped before its fixpoint.
pub fn grow2(m1: &CounterSystem, y: &Formula, g1: &Formula, session: &Session<'_>) -> Result<Formula, Stop> {
    if g1.is_false() {
        return Ok(Formula::False);
    }
    let solver = session.solver();
    let qe = |e: PresburgerError| session.stop_for(e);
    let branching = more_than_one_succ_outside(solver, m1, y).map_err(qe)?;
    let sub = session.same();
    let a = pre_star(m1, &branching, &sub)?;
    session.absorb(&sub);
    if !a.is_precise() {
        session.note("grow2 skipped: pre* stopped early");
        return Ok(Formula::False);
    }
    let sub = session.same();
    let b = pre_star(m1, g1, &sub)?;
    session.absorb(&sub);
    if !b.is_precise() {
        session.note("grow2 skipped: pre* stopped early");
        return Ok(Formula::False);
    }
    let g2 = Formula::and2(Formula::not(a.formula), b.formula);
    solver.normalize(&g2).map_err(qe)
}

/// Shrinks an over-approximation of `EG φ` within `reach`.
///
/// `Y` starts as the stuck states of `M₁ = refine(M, φ)` together with
/// `¬φ` and grows by `grow1 ∨ grow2` while that is satisfiable. The result
/// is `reach ∧ ¬Y`, `precise` when the loop ran out of new states and
/// `over` when stopped. `reach` must over-approximate the reachable states.
pub fn compute_global_over(m: &CounterSystem, phi: &Formula, reach: &Formula, session: &Session<'_>) -> Result<EgRun, Stop> {
    let mut y = Formula::False;
    let mut history = Vec::new();
    let out = run(m, phi, session, &mut y, &mut history);
    let label = match out {
        Ok(()) => ApproxLabel::Precise,
        Err(Stop::Forced) => {
            session.with_stats(|s| s.forced_stops += 1);
            ApproxLabel::Over
        }
        Err(Stop::Deadline) => return Err(Stop::Deadline),
    };
    let solver = session.solver();
    let result = Formula::and2(reach.clone(), Formula::not(y));
    let result = solver.normalize(&result).unwrap_or_else(|_| simplify(&result));
    Ok(EgRun { result: CheckResult::new(result, label, session.stats()), history })
}

fn run(m: &CounterSystem, phi: &Formula, session: &Session<'_>, y: &mut Formula, history: &mut Vec<Formula>) -> Result<(), Stop> {
    let solver = session.solver();
    let qe = |e: PresburgerError| session.stop_for(e);
    let phi = solver.normalize(phi).map_err(qe)?;
    let m1 = m.refine(&phi);
    let start = Formula::or2(m1.stuck_states(), Formula::not(phi.clone()));
    *y = solver.normalize(&start).map_err(qe)?;
    history.push(y.clone());
    let mut iterations = 0;
    loop {
        session.check(iterations)?;
        iterations += 1;
        session.with_stats(|s| s.eg_iterations += 1);
        let g1 = grow1(solver, &m1, y).map_err(qe)?;
        let g2 = grow2(&m1, y, &g1, session)?;
        let grow = Formula::or2(g1, g2);
        if !solver.is_satisfiable(&grow).map_err(qe)? {
            return Ok(());
        }
        let next = Formula::or2(y.clone(), grow);
        *y = solver.normalize(&next).map_err(qe)?;
        history.push(y.clone());
    }
}
