//! Exact-step predecessors on flat systems and the universal closure over
//! the step count.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::accel::{accelerate_cycle, AccelError, AcceleratedCycle};
use crate::int::Int;
use crate::presburger::{fresh_var, simplify, Formula, LinearTerm, PresburgerError, Solver, Var};
use crate::system::{CounterSystem, Transition};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlatError {
    #[error("system is not flat")]
    NotFlat,
    #[error(transparent)]
    Accel(#[from] AccelError),
}

impl From<PresburgerError> for FlatError {
    fn from(e: PresburgerError) -> Self {
        FlatError::Accel(AccelError::Presburger(e))
    }
}

/// The name used for the step count: `k`, unless a counter already has it.
pub fn step_var(m: &CounterSystem) -> Var {
    let k = Var::new("k");
    if m.counters().contains(&k) {
        let taken = m.counters().iter().cloned().collect();
        fresh_var(&k, &taken)
    } else {
        k
    }
}

fn shift_k(f: &Formula, k: &Var, by: i64) -> Formula {
    f.substitute_var(k, &LinearTerm::var(k.clone()).add_constant(&Int::from(-by)))
}

/// States from which `phi` is reached in exactly `k` steps, as a formula
/// over `q`, the counters and `k` (see [`step_var`]).
///
/// The control graph is processed one strongly connected component at a
/// time, sinks first. For a component that is a simple cycle, a path first
/// runs `n` full iterations from its starting control (accelerated), then a
/// partial turn of `r` steps, then stops or leaves the component.
pub fn pre_k_flat(solver: &Solver<'_>, n: &CounterSystem, phi: &Formula) -> Result<Formula, FlatError> {
    let g = n.control_graph();
    if !g.is_flat() {
        return Err(FlatError::NotFlat);
    }
    let k = step_var(n);
    let kt = LinearTerm::var(k.clone());
    let phi = solver.eliminate_quantifiers(phi)?;
    let ts = n.transitions();
    // per control index: formula over counters and k, q eliminated
    let mut p: Vec<Option<Formula>> = alloc::vec![None; g.node_count()];
    let at = |f: &Formula, q: u32| simplify(&f.substitute_var(&Var::control(), &LinearTerm::constant(q)));
    let through = |t: &Transition, f: &Formula| -> Result<Formula, PresburgerError> {
        let pre = t.pre(solver, &shift_k(f, &k, 1))?;
        Ok(at(&pre, t.source()))
    };

    for comp in g.sccs() {
        let internal = g.internal_edges(&comp);
        let in_comp = |e: usize| internal.contains(&e);
        // paths that stop here or leave the component immediately
        let mut out: BTreeMap<usize, Formula> = BTreeMap::new();
        for &c in &comp {
            let q = g.node(c);
            let mut parts = alloc::vec![Formula::and2(Formula::eq(&kt, &LinearTerm::zero()), at(&phi, q))];
            for &e in g.out_edges(c) {
                if in_comp(e) {
                    continue;
                }
                let tgt = g.edge(e).1;
                let f = p[tgt].clone().expect("successor component processed first");
                parts.push(through(&ts[e], &f)?);
            }
            out.insert(c, solver.normalize(&Formula::or(parts))?);
        }
        if internal.is_empty() {
            for &c in &comp {
                p[c] = out.remove(&c);
            }
            continue;
        }
        // order the cycle starting from each member
        let mut next_edge = BTreeMap::new();
        for &e in &internal {
            next_edge.insert(g.edge(e).0, e);
        }
        let len = comp.len();
        for &c in &comp {
            let mut edges = Vec::with_capacity(len);
            let mut cur = c;
            for _ in 0..len {
                let e = next_edge[&cur];
                edges.push(e);
                cur = g.edge(e).1;
            }
            let cycle: Vec<Transition> = edges.iter().map(|&e| ts[e].clone()).collect();
            let acc: AcceleratedCycle = accelerate_cycle(solver, &cycle, n.counters())?;
            // partial turns of r steps, built back to front
            let mut total = Vec::new();
            for r in 0..len {
                let end = g.edge(edges[(r + len - 1) % len]).1;
                let mut f = if r == 0 { out[&c].clone() } else { out[&end].clone() };
                for i in (0..r).rev() {
                    f = through(&ts[edges[i]], &f)?;
                }
                total.push(f);
            }
            let base = solver.normalize(&Formula::or(total))?;
            let looped = acc.pre(solver, &base, Some(&k))?;
            let looped = at(&looped, g.node(c));
            p[c] = Some(solver.normalize(&Formula::or2(base, looped))?);
        }
    }
    let mut parts = Vec::new();
    for (i, f) in p.into_iter().enumerate() {
        let f = f.unwrap_or(Formula::False);
        parts.push(Formula::and2(Formula::var_eq(&Var::control(), g.node(i)), f));
    }
    Ok(solver.normalize(&Formula::or(parts))?)
}

/// `∀k ≥ 0. f` for `f` downward closed in `k`, such as `pre^k` of a system
/// whose guards all imply the target: a path of `k` steps then has prefixes
/// of every shorter length. Avoids negating `f`.
pub fn forall_k_closure_monotone(solver: &Solver<'_>, f: &Formula, k: &Var) -> Result<Formula, PresburgerError> {
    solver.unbounded_in(f, k)
}

/// `∀k. k ≥ 0 ⇒ f`, quantifier-free.
pub fn forall_k_closure(solver: &Solver<'_>, f: &Formula, k: &Var) -> Result<Formula, PresburgerError> {
    let kt = LinearTerm::var(k.clone());
    let body = Formula::implies(Formula::ge(&kt, &LinearTerm::zero()), f.clone());
    let closed = solver.eliminate_quantifiers(&Formula::forall(k.clone(), body))?;
    solver.normalize(&closed)
}
