//! Acceleration of cycles whose net effect is a guarded translation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::int::Int;
use crate::presburger::{
    fresh_var, simplify, Atom, Formula, LinearTerm, PresburgerError, Solver, Var,
};
use crate::system::{Transition, Update};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AccelError {
    #[error("cycle [{cycle}] is not accelerable: {reason}")]
    NotAccelerable { cycle: String, reason: &'static str },
    #[error(transparent)]
    Presburger(#[from] PresburgerError),
}

/// A simple cycle with a closed form for any number of iterations.
///
/// One iteration from the entry control maps `x` to `x + d` and is enabled
/// exactly on `G(x)`. When `G` is a conjunction of linear constraints (with
/// divisibility constraints the translation preserves), `G(x + i·d)` is
/// convex in `i`, so iterations `0..n` are all enabled iff `G(x)` and
/// `G(x + (n-1)·d)` hold. Other guards are checked at every iteration
/// through a universally quantified offset.
#[derive(Clone, Debug)]
pub struct AcceleratedCycle {
    transitions: Vec<Transition>,
    entry: u32,
    counters: Vec<Var>,
    displacement: BTreeMap<Var, Int>,
    guard: Formula,
    convex: bool,
}

fn cycle_name(cycle: &[Transition]) -> String {
    let ids: Vec<&str> = cycle.iter().map(Transition::id).collect();
    ids.join(", ")
}

/// Tries to accelerate `cycle`, entered at the source of its first transition.
pub fn accelerate_cycle(
    solver: &Solver<'_>,
    cycle: &[Transition],
    counters: &[Var],
) -> Result<AcceleratedCycle, AccelError> {
    let fail = |reason| AccelError::NotAccelerable { cycle: cycle_name(cycle), reason };
    let Some(first) = cycle.first() else {
        return Err(fail("empty cycle"));
    };
    for (i, t) in cycle.iter().enumerate() {
        let next = &cycle[(i + 1) % cycle.len()];
        if t.target() != next.source() {
            return Err(fail("transitions do not form a cycle"));
        }
    }
    let mut sigma: BTreeMap<Var, LinearTerm> =
        counters.iter().map(|c| (c.clone(), LinearTerm::var(c.clone()))).collect();
    let mut guards = Vec::new();
    for t in cycle {
        guards.push(t.local_guard().substitute(&sigma));
        let mut next = sigma.clone();
        for (v, u) in t.updates() {
            match u {
                Update::Assign(term) => {
                    next.insert(v.clone(), term.substitute(&sigma));
                }
                Update::Range(..) => return Err(fail("non-functional update")),
            }
        }
        sigma = next;
    }
    let mut displacement = BTreeMap::new();
    for (c, t) in &sigma {
        let d = t.sub(&LinearTerm::var(c.clone()));
        if !d.is_constant() {
            return Err(fail("composed update is not a translation"));
        }
        if !d.constant_part().is_zero() {
            displacement.insert(c.clone(), d.constant_part().clone());
        }
    }
    let guard = Formula::and(guards);
    let parts = solver.disjuncts(&guard)?;
    let (guard, mut convex) = match parts.len() {
        0 => (Formula::False, true),
        1 => (parts.into_iter().next().unwrap(), true),
        _ => (solver.normalize(&guard)?, false),
    };
    if convex {
        for a in guard.atoms() {
            if let Atom::Div(m, t) = a {
                let drift = displacement
                    .iter()
                    .fold(Int::ZERO, |acc, (v, d)| acc + t.coeff(v) * d);
                convex &= m.divides(&drift);
            }
        }
    }
    Ok(AcceleratedCycle {
        transitions: cycle.to_vec(),
        entry: first.source(),
        counters: counters.to_vec(),
        displacement,
        guard,
        convex,
    })
}

impl AcceleratedCycle {
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn entry(&self) -> u32 {
        self.entry
    }

    /// Steps per iteration.
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Net translation of one iteration; zero entries omitted.
    pub fn displacement(&self) -> &BTreeMap<Var, Int> {
        &self.displacement
    }

    /// Constraint on the entry state enabling one full iteration.
    pub fn guard(&self) -> &Formula {
        &self.guard
    }

    fn shifted(&self, scale: &LinearTerm) -> BTreeMap<Var, LinearTerm> {
        self.displacement
            .iter()
            .map(|(v, d)| (v.clone(), LinearTerm::var(v.clone()).add(&scale.scale(d))))
            .collect()
    }

    /// Whether the endpoint check is exact for this cycle's guard.
    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Iterations `lo..=hi` (offsets of the current state) are all enabled;
    /// assumes `lo <= hi`.
    fn enabled_between(&self, lo: &LinearTerm, hi: &LinearTerm, taken: &BTreeSet<Var>) -> Formula {
        if self.convex {
            return Formula::and2(self.guard.substitute(&self.shifted(lo)), self.guard.substitute(&self.shifted(hi)));
        }
        let i = fresh_var(&Var::new("i"), taken);
        let it = LinearTerm::var(i.clone());
        let inside = Formula::and2(Formula::le(lo, &it), Formula::le(&it, hi));
        Formula::forall(i, Formula::implies(inside, self.guard.substitute(&self.shifted(&it))))
    }

    fn taken(&self, extra: &Formula) -> BTreeSet<Var> {
        let mut t = extra.all_vars();
        t.extend(self.counters.iter().cloned());
        t.insert(Var::control());
        t
    }

    /// Relation between the entry state (unprimed) and the state after `n`
    /// iterations (primed).
    pub fn param_relation(&self, n: &Var) -> Formula {
        let q = Var::control();
        let nt = LinearTerm::var(n.clone());
        let at_entry = Formula::and2(Formula::var_eq(&q, self.entry), Formula::var_eq(&q.primed(), self.entry));
        let ident = Formula::and(self.counters.iter().map(|c| Formula::vars_eq(&c.primed(), c)));
        let zero = Formula::and([Formula::var_eq(n, 0), ident]);
        let moved = Formula::and(self.counters.iter().map(|c| {
            let d = self.displacement.get(c).cloned().unwrap_or(Int::ZERO);
            Formula::eq(&LinearTerm::var(c.primed()), &LinearTerm::var(c.clone()).add(&nt.scale(&d)))
        }));
        let mut taken = self.taken(&Formula::True);
        taken.insert(n.clone());
        let all = self.enabled_between(&LinearTerm::constant(0), &nt.add_constant(&Int::from(-1)), &taken);
        let some = Formula::and([Formula::ge(&nt, &LinearTerm::constant(1)), all, moved]);
        Formula::and2(at_entry, Formula::or2(zero, some))
    }

    /// Entry states reaching `f` after one or more iterations. When `k` is
    /// given it counts steps: `f` is read at `k - n·len`.
    pub fn pre(&self, solver: &Solver<'_>, f: &Formula, k: Option<&Var>) -> Result<Formula, PresburgerError> {
        let n = fresh_var(&Var::new("n"), &self.taken(f));
        let nt = LinearTerm::var(n.clone());
        let mut map = self.shifted(&nt);
        map.insert(Var::control(), LinearTerm::constant(self.entry));
        if let Some(k) = k {
            let steps = Int::from(self.len());
            map.insert(k.clone(), LinearTerm::var(k.clone()).sub(&nt.scale(&steps)));
        }
        let mut taken = self.taken(f);
        taken.insert(n.clone());
        let body = Formula::and([
            Formula::ge(&nt, &LinearTerm::constant(1)),
            self.enabled_between(&LinearTerm::constant(0), &nt.add_constant(&Int::from(-1)), &taken),
            f.substitute(&map),
        ]);
        let out = solver.project(&[n], &body)?;
        Ok(simplify(&Formula::and2(Formula::var_eq(&Var::control(), self.entry), out)))
    }

    /// States reached from `f` at the entry after one or more iterations.
    pub fn post(&self, solver: &Solver<'_>, f: &Formula) -> Result<Formula, PresburgerError> {
        let n = fresh_var(&Var::new("n"), &self.taken(f));
        let nt = LinearTerm::var(n.clone());
        let back = nt.negate();
        let mut map = self.shifted(&back);
        map.insert(Var::control(), LinearTerm::constant(self.entry));
        let mut taken = self.taken(f);
        taken.insert(n.clone());
        let body = Formula::and([
            Formula::ge(&nt, &LinearTerm::constant(1)),
            self.enabled_between(&back, &LinearTerm::constant(-1), &taken),
            f.substitute(&map),
        ]);
        let out = solver.project(&[n], &body)?;
        Ok(simplify(&Formula::and2(Formula::var_eq(&Var::control(), self.entry), out)))
    }
}

/// Accelerations of every rotation of the simple cycles of `m` that admit
/// one, plus the cycles that do not.
pub fn accelerate_all(
    solver: &Solver<'_>,
    m: &crate::system::CounterSystem,
    limit: usize,
) -> Result<(Vec<AcceleratedCycle>, Vec<AccelError>), PresburgerError> {
    let g = m.control_graph();
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for cyc in g.simple_cycles(limit) {
        let ts: Vec<Transition> = cyc.iter().map(|&e| m.transitions()[e].clone()).collect();
        for r in 0..ts.len() {
            let mut rot = ts[r..].to_vec();
            rot.extend_from_slice(&ts[..r]);
            match accelerate_cycle(solver, &rot, m.counters()) {
                Ok(a) => {
                    if !a.guard.is_false() {
                        ok.push(a);
                    }
                }
                Err(AccelError::Presburger(e)) => return Err(e),
                Err(e) => bad.push(e),
            }
        }
    }
    Ok((ok, bad))
}
