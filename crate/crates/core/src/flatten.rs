//! Flattenings of a counter system and the trace-inclusion check.
//!
//! A flattening is a flat system built from copies of the controls and
//! transitions of an origin system. Inside a [`Flattening`] the control
//! variable `q` ranges over copy indices; [`Flattening::to_origin`] and
//! [`Flattening::from_origin`] translate state formulas between the two
//! numberings. Every copied transition keeps the guard and updates of its
//! origin.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::presburger::{simplify, Formula, LinearTerm, Solver, Var};
use crate::reach::{post_star, Session};
use crate::system::{ControlGraph, CounterSystem, Transition};

/// Copy origins and `(source copy, origin transition, target copy)` edges.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Shape {
    origins: Vec<u32>,
    edges: Vec<(usize, usize, usize)>,
}

impl Shape {
    fn graph(&self) -> ControlGraph {
        let nodes = (0..self.origins.len() as u32).collect();
        ControlGraph::from_edges(nodes, self.edges.iter().map(|&(s, _, d)| (s, d)).collect())
    }

    fn relabel(&self, pos: &[usize]) -> Shape {
        let mut origins = alloc::vec![0; self.origins.len()];
        for (i, &o) in self.origins.iter().enumerate() {
            origins[pos[i]] = o;
        }
        let mut edges: Vec<_> = self.edges.iter().map(|&(s, t, d)| (pos[s], t, pos[d])).collect();
        edges.sort_unstable();
        Shape { origins, edges }
    }

    /// Lexicographically least relabelling among those compatible with a
    /// colour refinement of the copies. Exact unless a tie class is large.
    fn canonical(&self) -> Shape {
        let n = self.origins.len();
        let mut color: Vec<usize> = rank(&self.origins);
        loop {
            let sigs: Vec<(usize, Vec<(usize, usize)>, Vec<(usize, usize)>)> = (0..n)
                .map(|i| {
                    let mut out: Vec<_> =
                        self.edges.iter().filter(|e| e.0 == i).map(|&(_, t, d)| (t, color[d])).collect();
                    let mut inc: Vec<_> =
                        self.edges.iter().filter(|e| e.2 == i).map(|&(s, t, _)| (t, color[s])).collect();
                    out.sort_unstable();
                    inc.sort_unstable();
                    (color[i], out, inc)
                })
                .collect();
            let next = rank(&sigs);
            let before = color.iter().collect::<BTreeSet<_>>().len();
            let after = next.iter().collect::<BTreeSet<_>>().len();
            color = next;
            if after == before {
                break;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in color.iter().enumerate() {
            groups.entry(c).or_default().push(i);
        }
        let groups: Vec<Vec<usize>> = groups.into_values().collect();
        let mut combos: usize = 1;
        for g in &groups {
            combos = combos.saturating_mul((1..=g.len()).product());
        }
        let exhaustive = combos <= 720;
        let mut best: Option<Shape> = None;
        let mut order: Vec<Vec<usize>> = groups.clone();
        loop {
            let mut pos = alloc::vec![0; n];
            for (k, &i) in order.iter().flatten().enumerate() {
                pos[i] = k;
            }
            let cand = self.relabel(&pos);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
            if !exhaustive || !next_combo(&mut order) {
                break;
            }
        }
        best.unwrap()
    }
}

fn rank<T: Ord + Clone>(xs: &[T]) -> Vec<usize> {
    let sorted: BTreeSet<T> = xs.iter().cloned().collect();
    let idx: BTreeMap<T, usize> = sorted.into_iter().enumerate().map(|(i, x)| (x, i)).collect();
    xs.iter().map(|x| idx[x]).collect()
}

fn next_perm(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Advances a tuple of per-group permutations, odometer style.
fn next_combo(groups: &mut [Vec<usize>]) -> bool {
    for g in groups.iter_mut().rev() {
        if next_perm(g) {
            return true;
        }
    }
    false
}

/// A flat system of copies, with maps back to the origin system.
#[derive(Clone, Debug)]
pub struct Flattening {
    system: CounterSystem,
    copy_of_control: Vec<u32>,
    copy_of_transition: Vec<usize>,
}

impl Flattening {
    fn build(origin: &CounterSystem, shape: &Shape) -> Flattening {
        let counters = origin.counters();
        let transitions: Vec<Transition> = shape
            .edges
            .iter()
            .map(|&(s, t, d)| {
                let ot = &origin.transitions()[t];
                ot.relocated(&format!("{}_{s}_{d}", ot.id()), s as u32, d as u32, counters)
            })
            .collect();
        let controls = (0..shape.origins.len() as u32).collect();
        let system = CounterSystem::from_parts(controls, counters.to_vec(), transitions, Formula::True);
        Flattening {
            system,
            copy_of_control: shape.origins.clone(),
            copy_of_transition: shape.edges.iter().map(|e| e.1).collect(),
        }
    }

    /// `m` itself with one copy per control, when `m` is flat.
    pub fn identity(m: &CounterSystem) -> Option<Flattening> {
        if !m.control_graph().is_flat() {
            return None;
        }
        let origins: Vec<u32> = m.controls().iter().copied().collect();
        let idx: BTreeMap<u32, usize> = origins.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let edges = m
            .transitions()
            .iter()
            .enumerate()
            .map(|(i, t)| (idx[&t.source()], i, idx[&t.target()]))
            .collect();
        Some(Flattening::build(m, &Shape { origins, edges }))
    }

    pub fn system(&self) -> &CounterSystem {
        &self.system
    }

    /// Origin control of each copy.
    pub fn copy_of_control(&self) -> &[u32] {
        &self.copy_of_control
    }

    /// Origin transition index of each copied transition.
    pub fn copy_of_transition(&self) -> &[usize] {
        &self.copy_of_transition
    }

    pub fn length(&self) -> usize {
        self.copy_of_transition.len()
    }

    pub fn is_flat(&self) -> bool {
        self.system.control_graph().is_flat()
    }

    /// A formula over copy states read as a formula over origin states.
    pub fn to_origin(&self, f: &Formula) -> Formula {
        let q = Var::control();
        let parts = self.copy_of_control.iter().enumerate().map(|(j, &o)| {
            let at = f.substitute_var(&q, &LinearTerm::constant(j as u32));
            Formula::and2(Formula::var_eq(&q, o), at)
        });
        simplify(&Formula::or(parts))
    }

    /// A formula over origin states read at every copy.
    pub fn from_origin(&self, f: &Formula) -> Formula {
        let q = Var::control();
        let parts = self.copy_of_control.iter().enumerate().map(|(j, &o)| {
            let at = f.substitute_var(&q, &LinearTerm::constant(o));
            Formula::and2(Formula::var_eq(&q, j as u32), at)
        });
        simplify(&Formula::or(parts))
    }

    /// `f` placed at the chosen copies only.
    fn at_copies(&self, f: &Formula, roots: &[usize]) -> Formula {
        let q = Var::control();
        let parts = roots.iter().map(|&j| {
            let at = f.substitute_var(&q, &LinearTerm::constant(self.copy_of_control[j]));
            Formula::and2(Formula::var_eq(&q, j as u32), at)
        });
        simplify(&Formula::or(parts))
    }
}

/// Enumerates flattenings of a system by increasing length.
///
/// Only transitions with a satisfiable guard are copied. A copy whose origin
/// has such a transition always gets an outgoing edge (a dead end there
/// would exhibit no trace the origin lacks and help no check). Isomorphic
/// flattenings are reported once.
pub struct FlatteningEnumerator<'m> {
    m: &'m CounterSystem,
    live: Vec<usize>,
    busy: BTreeSet<u32>,
    length: usize,
    shapes: BTreeSet<Shape>,
    cap: usize,
    truncated: bool,
}

/// Default limit on partial shapes kept between lengths.
pub const SHAPE_CAP: usize = 100_000;

impl<'m> FlatteningEnumerator<'m> {
    /// Transitions whose guard cannot be shown unsatisfiable are live.
    pub fn new(solver: &Solver<'_>, m: &'m CounterSystem) -> FlatteningEnumerator<'m> {
        let live: Vec<usize> = (0..m.transitions().len())
            .filter(|&i| solver.is_satisfiable(m.transitions()[i].guard()).unwrap_or(true))
            .collect();
        FlatteningEnumerator::with_live(m, live)
    }

    pub fn with_live(m: &'m CounterSystem, live: Vec<usize>) -> FlatteningEnumerator<'m> {
        let busy = live.iter().map(|&i| m.transitions()[i].source()).collect();
        let mut shapes = BTreeSet::new();
        shapes.insert(Shape { origins: Vec::new(), edges: Vec::new() });
        FlatteningEnumerator { m, live, busy, length: 0, shapes, cap: SHAPE_CAP, truncated: false }
    }

    pub fn set_cap(&mut self, cap: usize) {
        self.cap = cap.max(1);
    }

    /// Whether some partial shape was dropped because of the cap.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn live_transitions(&self) -> &[usize] {
        &self.live
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Flattenings with one more transition than the previous call's.
    pub fn next_length(&mut self) -> Vec<Flattening> {
        let mut next = BTreeSet::new();
        'outer: for s in &self.shapes {
            for cand in self.extensions(s) {
                if next.len() >= self.cap {
                    self.truncated = true;
                    break 'outer;
                }
                next.insert(cand);
            }
        }
        self.shapes = next;
        self.length += 1;
        self.shapes
            .iter()
            .filter(|s| self.complete(s))
            .map(|s| Flattening::build(self.m, s))
            .collect()
    }

    fn complete(&self, s: &Shape) -> bool {
        s.origins.iter().enumerate().all(|(j, o)| !self.busy.contains(o) || s.edges.iter().any(|e| e.0 == j))
    }

    fn extensions(&self, s: &Shape) -> Vec<Shape> {
        let n = s.origins.len();
        let mut out = Vec::new();
        for &ti in &self.live {
            let t = &self.m.transitions()[ti];
            let (so, to) = (t.source(), t.target());
            let mut srcs: Vec<usize> = (0..n).filter(|&j| s.origins[j] == so).collect();
            srcs.push(n);
            for &src in &srcs {
                let fresh_src = src == n;
                let base = if fresh_src { n + 1 } else { n };
                let mut dsts: Vec<usize> = (0..n).filter(|&j| s.origins[j] == to).collect();
                if fresh_src && so == to {
                    dsts.push(src);
                }
                dsts.push(base);
                for &dst in &dsts {
                    let mut origins = s.origins.clone();
                    if fresh_src {
                        origins.push(so);
                    }
                    if dst == base {
                        origins.push(to);
                    }
                    let e = (src, ti, dst);
                    if s.edges.contains(&e) {
                        continue;
                    }
                    let mut edges = s.edges.clone();
                    edges.push(e);
                    edges.sort_unstable();
                    let cand = Shape { origins, edges };
                    if cand.graph().is_flat() {
                        out.push(cand.canonical());
                    }
                }
            }
        }
        out
    }
}

/// All flattenings of `m` with exactly `length` transitions.
pub fn enumerate_flattenings(solver: &Solver<'_>, m: &CounterSystem, length: usize) -> Vec<Flattening> {
    let mut e = FlatteningEnumerator::new(solver, m);
    let mut out = Vec::new();
    for _ in 0..length {
        out = e.next_length();
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TraceCheck {
    Holds,
    Unknown,
}

/// Upper bound on root assignments tried by [`trace_inclusion_check`].
pub const ROOT_COMBINATIONS: usize = 64;

/// Sufficient check that every trace of `m1` from a state of `phi` is a
/// trace of `n`.
///
/// For some choice of one root copy per origin control, states of `phi` are
/// placed at the roots and their reachable region `R_j` inside `n` is
/// computed for every copy `j`. The check holds when no origin transition
/// missing at a copy is enabled anywhere in that copy's region: then every
/// trace of `m1` can be replayed step by step in `n`.
pub fn trace_inclusion_check(m1: &CounterSystem, n: &Flattening, phi: &Formula, session: &Session<'_>) -> TraceCheck {
    let solver = session.solver();
    let q = Var::control();
    let mut choices: Vec<Vec<usize>> = Vec::new();
    for &o in m1.controls() {
        let here = phi.substitute_var(&q, &LinearTerm::constant(o));
        match solver.is_satisfiable(&here) {
            Ok(false) => continue,
            Ok(true) => {}
            Err(_) => return TraceCheck::Unknown,
        }
        let copies: Vec<usize> = (0..n.copy_of_control.len()).filter(|&j| n.copy_of_control[j] == o).collect();
        if copies.is_empty() {
            return TraceCheck::Unknown;
        }
        choices.push(copies);
    }
    let mut pick = alloc::vec![0usize; choices.len()];
    for _ in 0..ROOT_COMBINATIONS {
        let roots: Vec<usize> = pick.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        match check_roots(m1, n, phi, &roots, session) {
            Some(true) => return TraceCheck::Holds,
            Some(false) => {}
            None => return TraceCheck::Unknown,
        }
        // odometer
        let mut k = pick.len();
        loop {
            if k == 0 {
                return TraceCheck::Unknown;
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
    TraceCheck::Unknown
}

/// `None` when the budget ran out.
fn check_roots(m1: &CounterSystem, n: &Flattening, phi: &Formula, roots: &[usize], session: &Session<'_>) -> Option<bool> {
    let solver = session.solver();
    let seed = n.at_copies(phi, roots);
    let sub = session.same();
    let reach = post_star(n.system(), &seed, &sub).ok()?;
    session.absorb(&sub);
    if !reach.is_precise() {
        return None;
    }
    let q = Var::control();
    for (j, &o) in n.copy_of_control.iter().enumerate() {
        let region = simplify(&reach.formula.substitute_var(&q, &LinearTerm::constant(j as u32)));
        if region.is_false() {
            continue;
        }
        let present: BTreeSet<usize> = n
            .system()
            .transitions()
            .iter()
            .zip(&n.copy_of_transition)
            .filter(|(t, _)| t.source() == j as u32)
            .map(|(_, &i)| i)
            .collect();
        for (i, t) in m1.transitions().iter().enumerate() {
            if t.source() != o || present.contains(&i) {
                continue;
            }
            let enabled = Formula::and2(region.clone(), t.local_guard().clone());
            match solver.is_satisfiable(&enabled) {
                Ok(false) => {}
                Ok(true) => return Some(false),
                Err(_) => return None,
            }
        }
    }
    Some(true)
}
