//! Explicit-state bounded model checker used as a reference.
//!
//! Shares nothing with the symbolic engine beyond the formula data types:
//! formulas are evaluated by a separate interpreter and successors are
//! computed by enumerating the updates of each enabled transition.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use crate::ctl::{Ctl, CtlFormula};
use crate::int::Int;
use crate::presburger::{Atom, Formula, LinearTerm, PresburgerError, Solver, StateVector, Var};
use crate::system::{CounterSystem, Update};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("more than {0} states")]
    CapExceeded(usize),
    #[error("range update with more than {0} values")]
    WideRange(usize),
    #[error("formula mentions `{0}`, which is not a state variable")]
    Unbound(Var),
    #[error(transparent)]
    Presburger(#[from] PresburgerError),
}

/// Default state cap.
pub const DEFAULT_CAP: usize = 100_000;
const MAX_RANGE: usize = 10_000;

fn term_value(t: &LinearTerm, s: &StateVector) -> Result<Int, OracleError> {
    let mut acc = t.constant_part().clone();
    for (v, a) in t.coeffs() {
        let x = if v.is_control() {
            Int::from(s.control)
        } else {
            s.counters.get(v).cloned().ok_or_else(|| OracleError::Unbound(v.clone()))?
        };
        acc = acc + a * &x;
    }
    Ok(acc)
}

/// Truth of a state formula at `s`. Quantified subformulas are handed to the
/// decision procedure after substituting the state.
pub fn holds(f: &Formula, s: &StateVector) -> Result<bool, OracleError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(Atom::Le(t)) => !term_value(t, s)?.is_positive(),
        Formula::Atom(Atom::Eq(t)) => term_value(t, s)?.is_zero(),
        Formula::Atom(Atom::Div(d, t)) => term_value(t, s)?.mod_floor(d).is_zero(),
        Formula::Not(g) => !holds(g, s)?,
        Formula::And(gs) => {
            for g in gs {
                if !holds(g, s)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if holds(g, s)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(a, b) => !holds(a, s)? || holds(b, s)?,
        Formula::Exists(..) | Formula::Forall(..) => {
            let mut map = BTreeMap::new();
            for v in f.free_vars() {
                let x = if v.is_control() {
                    Int::from(s.control)
                } else {
                    s.counters.get(&v).cloned().ok_or_else(|| OracleError::Unbound(v.clone()))?
                };
                map.insert(v, LinearTerm::constant(x));
            }
            Solver::default().is_satisfiable(&f.substitute(&map))?
        }
    })
}

/// Concrete successors of `s` in `m`.
pub fn successors(m: &CounterSystem, s: &StateVector) -> Result<Vec<StateVector>, OracleError> {
    let mut out = Vec::new();
    for t in m.transitions() {
        if t.source() != s.control || !holds(t.local_guard(), s)? {
            continue;
        }
        let mut partial: Vec<BTreeMap<Var, Int>> = alloc::vec![BTreeMap::new()];
        for c in m.counters() {
            let choices: Vec<Int> = match t.update(c) {
                None => alloc::vec![s.counters[c].clone()],
                Some(Update::Assign(e)) => alloc::vec![term_value(e, s)?],
                Some(Update::Range(lo, hi)) => {
                    let (lo, hi) = (term_value(lo, s)?, term_value(hi, s)?);
                    let mut v = Vec::new();
                    let mut x = lo;
                    while x <= hi {
                        if v.len() >= MAX_RANGE {
                            return Err(OracleError::WideRange(MAX_RANGE));
                        }
                        v.push(x.clone());
                        x = x + Int::ONE;
                    }
                    v
                }
            };
            let mut next = Vec::with_capacity(partial.len() * choices.len());
            for p in &partial {
                for x in &choices {
                    let mut q = p.clone();
                    q.insert(c.clone(), x.clone());
                    next.push(q);
                }
            }
            partial = next;
        }
        for counters in partial {
            let succ = StateVector { control: t.target(), counters };
            if !out.contains(&succ) {
                out.push(succ);
            }
        }
    }
    Ok(out)
}

/// The forward closure of a finite set of states.
#[derive(Clone, Debug)]
pub struct FiniteGraph {
    states: Vec<StateVector>,
    index: BTreeMap<StateVector, usize>,
    succ: Vec<Vec<usize>>,
    complete: bool,
}

/// States of `m` satisfying `from` with every counter in `[lo, hi]`, and
/// everything reachable from them. Fails when more than `cap` states are
/// found.
pub fn explore(m: &CounterSystem, from: &Formula, lo: i64, hi: i64, cap: usize) -> Result<FiniteGraph, OracleError> {
    let mut g = FiniteGraph { states: Vec::new(), index: BTreeMap::new(), succ: Vec::new(), complete: false };
    let mut queue = VecDeque::new();
    let n = m.counters().len();
    for &q in m.controls() {
        let mut vals = alloc::vec![lo; n];
        loop {
            let s = StateVector::new(q, m.counters().iter().cloned().zip(vals.iter().map(|&v| Int::from(v))));
            if holds(from, &s)? {
                let i = g.add(s, cap)?;
                queue.push_back(i);
            }
            let mut k = 0;
            while k < n {
                vals[k] += 1;
                if vals[k] <= hi {
                    break;
                }
                vals[k] = lo;
                k += 1;
            }
            if k == n || hi < lo {
                break;
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        let s = g.states[i].clone();
        for t in successors(m, &s)? {
            let known = g.index.contains_key(&t);
            let j = g.add(t, cap)?;
            if !known {
                queue.push_back(j);
            }
            if !g.succ[i].contains(&j) {
                g.succ[i].push(j);
            }
        }
    }
    g.complete = true;
    Ok(g)
}

impl FiniteGraph {
    fn add(&mut self, s: StateVector, cap: usize) -> Result<usize, OracleError> {
        if let Some(&i) = self.index.get(&s) {
            return Ok(i);
        }
        if self.states.len() >= cap {
            return Err(OracleError::CapExceeded(cap));
        }
        let i = self.states.len();
        self.index.insert(s.clone(), i);
        self.states.push(s);
        self.succ.push(Vec::new());
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &StateVector {
        &self.states[i]
    }

    pub fn index_of(&self, s: &StateVector) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    /// Membership vector of a state formula.
    pub fn sat_prop(&self, f: &Formula) -> Result<Vec<bool>, OracleError> {
        self.states.iter().map(|s| holds(f, s)).collect()
    }

    fn ex(&self, set: &[bool]) -> Vec<bool> {
        (0..self.len()).map(|i| self.succ[i].iter().any(|&j| set[j])).collect()
    }

    /// Exact satisfaction set of a CTL formula.
    pub fn check(&self, psi: &CtlFormula) -> Result<Vec<bool>, OracleError> {
        Ok(match psi {
            CtlFormula::Prop(f) => self.sat_prop(f)?,
            CtlFormula::Not(a) => self.check(a)?.into_iter().map(|b| !b).collect(),
            CtlFormula::Or(a, b) => {
                let (x, y) = (self.check(a)?, self.check(b)?);
                x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
            }
            CtlFormula::EX(a) => self.ex(&self.check(a)?),
            CtlFormula::EU(a, b) => {
                let (x, mut z) = (self.check(a)?, self.check(b)?);
                loop {
                    let pre = self.ex(&z);
                    let next: Vec<bool> = (0..self.len()).map(|i| z[i] || (x[i] && pre[i])).collect();
                    if next == z {
                        break z;
                    }
                    z = next;
                }
            }
            CtlFormula::EG(a) => {
                let x = self.check(a)?;
                let mut z = x.clone();
                loop {
                    let pre = self.ex(&z);
                    let next: Vec<bool> = (0..self.len()).map(|i| x[i] && pre[i]).collect();
                    if next == z {
                        break z;
                    }
                    z = next;
                }
            }
        })
    }

    fn ax(&self, set: &[bool]) -> Vec<bool> {
        (0..self.len()).map(|i| self.succ[i].iter().all(|&j| set[j])).collect()
    }

    /// Satisfaction set of surface CTL, with the universal operators
    /// evaluated by their own fixpoints rather than through negation.
    pub fn check_full(&self, psi: &Ctl) -> Result<Vec<bool>, OracleError> {
        let both = |a: &Ctl, b: &Ctl| -> Result<(Vec<bool>, Vec<bool>), OracleError> { Ok((self.check_full(a)?, self.check_full(b)?)) };
        Ok(match psi {
            Ctl::Prop(f) => self.sat_prop(f)?,
            Ctl::Not(a) => self.check_full(a)?.into_iter().map(|b| !b).collect(),
            Ctl::And(a, b) => {
                let (x, y) = both(a, b)?;
                x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
            }
            Ctl::Or(a, b) => {
                let (x, y) = both(a, b)?;
                x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
            }
            Ctl::Implies(a, b) => {
                let (x, y) = both(a, b)?;
                x.iter().zip(&y).map(|(p, q)| !*p || *q).collect()
            }
            Ctl::EX(a) => self.ex(&self.check_full(a)?),
            Ctl::AX(a) => self.ax(&self.check_full(a)?),
            Ctl::EF(a) => self.pre_star(&self.check_full(a)?),
            Ctl::EU(a, b) => {
                let (x, y) = both(a, b)?;
                self.lfp(&y, |z| self.ex(z), &x)
            }
            Ctl::AF(a) => {
                let y = self.check_full(a)?;
                let all = alloc::vec![true; self.len()];
                self.lfp(&y, |z| self.ax_live(z), &all)
            }
            Ctl::AU(a, b) => {
                let (x, y) = both(a, b)?;
                self.lfp(&y, |z| self.ax_live(z), &x)
            }
            Ctl::EG(a) => {
                let x = self.check_full(a)?;
                self.gfp(&x, |z| self.ex(z))
            }
            Ctl::AG(a) => {
                let x = self.check_full(a)?;
                self.gfp(&x, |z| self.ax(z))
            }
        })
    }

    /// All successors in `set`, and at least one successor.
    fn ax_live(&self, set: &[bool]) -> Vec<bool> {
        (0..self.len()).map(|i| !self.succ[i].is_empty() && self.succ[i].iter().all(|&j| set[j])).collect()
    }

    /// Least `z` with `z = base ∨ (guard ∧ step(z))`.
    fn lfp(&self, base: &[bool], step: impl Fn(&[bool]) -> Vec<bool>, guard: &[bool]) -> Vec<bool> {
        let mut z = base.to_vec();
        loop {
            let s = step(&z);
            let next: Vec<bool> = (0..self.len()).map(|i| z[i] || (guard[i] && s[i])).collect();
            if next == z {
                return z;
            }
            z = next;
        }
    }

    /// Greatest `z` with `z = base ∧ step(z)`.
    fn gfp(&self, base: &[bool], step: impl Fn(&[bool]) -> Vec<bool>) -> Vec<bool> {
        let mut z = base.to_vec();
        loop {
            let s = step(&z);
            let next: Vec<bool> = (0..self.len()).map(|i| base[i] && s[i]).collect();
            if next == z {
                return z;
            }
            z = next;
        }
    }

    /// States with a path of exactly `k` steps into `target`.
    pub fn pre_k(&self, target: &[bool], k: usize) -> Vec<bool> {
        let mut cur = target.to_vec();
        for _ in 0..k {
            cur = self.ex(&cur);
        }
        cur
    }

    /// States with a path of zero or more steps into `target`.
    pub fn pre_star(&self, target: &[bool]) -> Vec<bool> {
        let mut cur = target.to_vec();
        loop {
            let pre = self.ex(&cur);
            let next: Vec<bool> = cur.iter().zip(&pre).map(|(a, b)| *a || *b).collect();
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    /// States reachable from `source` in zero or more steps.
    pub fn post_star(&self, source: &[bool]) -> Vec<bool> {
        let mut seen = source.to_vec();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&i| seen[i]).collect();
        while let Some(i) = queue.pop_front() {
            for &j in &self.succ[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }
}

/// Satisfaction set of `psi` on `g` as states.
pub fn oracle_ctl(g: &FiniteGraph, psi: &CtlFormula) -> Result<Vec<StateVector>, OracleError> {
    let bits = g.check(psi)?;
    Ok(g.states.iter().zip(bits).filter(|(_, b)| *b).map(|(s, _)| s.clone()).collect())
}
