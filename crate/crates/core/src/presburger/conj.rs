//! Conjunctions of literals, the working representation of the decision
//! procedure.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::formula::{Atom, Formula};
use super::term::{LinearTerm, Var};
use crate::int::Int;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) enum Lit {
    Le(LinearTerm),
    Eq(LinearTerm),
    Div(Int, LinearTerm),
    NDiv(Int, LinearTerm),
}

impl Lit {
    pub(crate) fn term(&self) -> &LinearTerm {
        match self {
            Lit::Le(t) | Lit::Eq(t) | Lit::Div(_, t) | Lit::NDiv(_, t) => t,
        }
    }

    pub(crate) fn map(&self, f: impl FnOnce(&LinearTerm) -> LinearTerm) -> Lit {
        match self {
            Lit::Le(t) => Lit::Le(f(t)),
            Lit::Eq(t) => Lit::Eq(f(t)),
            Lit::Div(m, t) => Lit::Div(m.clone(), f(t)),
            Lit::NDiv(m, t) => Lit::NDiv(m.clone(), f(t)),
        }
    }

    /// The negation as a disjunction of literals.
    pub(crate) fn negate(&self) -> Vec<Lit> {
        let one = Int::ONE;
        match self {
            Lit::Le(t) => alloc::vec![Lit::Le(t.negate().add_constant(&one))],
            Lit::Eq(t) => alloc::vec![
                Lit::Le(t.add_constant(&one)),
                Lit::Le(t.negate().add_constant(&one)),
            ],
            Lit::Div(m, t) => alloc::vec![Lit::NDiv(m.clone(), t.clone())],
            Lit::NDiv(m, t) => alloc::vec![Lit::Div(m.clone(), t.clone())],
        }
    }

    pub(crate) fn to_formula(&self) -> Formula {
        match self {
            Lit::Le(t) => Formula::le_zero(t.clone()),
            Lit::Eq(t) => Formula::eq_zero(t.clone()),
            Lit::Div(m, t) => Formula::divides(m.clone(), t.clone()),
            Lit::NDiv(m, t) => Formula::not(Formula::divides(m.clone(), t.clone())),
        }
    }

    pub(crate) fn from_atom(a: &Atom, positive: bool) -> Vec<Lit> {
        let l = match a {
            Atom::Le(t) => Lit::Le(t.clone()),
            Atom::Eq(t) => Lit::Eq(t.clone()),
            Atom::Div(m, t) => Lit::Div(m.clone(), t.clone()),
        };
        if positive {
            alloc::vec![l]
        } else {
            l.negate()
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub(crate) struct Bounds {
    pub(crate) lo: Option<Int>,
    pub(crate) hi: Option<Int>,
}

impl Bounds {
    fn within(&self, other: &Bounds) -> bool {
        let lo_ok = match (&other.lo, &self.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b,
        };
        let hi_ok = match (&other.hi, &self.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b <= a,
        };
        lo_ok && hi_ok
    }

    /// Union if the two intervals overlap or touch.
    fn union(&self, other: &Bounds) -> Option<Bounds> {
        let touches = |hi: &Option<Int>, lo: &Option<Int>| match (hi, lo) {
            (Some(h), Some(l)) => l <= &(h + &Int::ONE),
            _ => true,
        };
        if !touches(&self.hi, &other.lo) || !touches(&other.hi, &self.lo) {
            return None;
        }
        let lo = match (&self.lo, &other.lo) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            _ => None,
        };
        let hi = match (&self.hi, &other.hi) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            _ => None,
        };
        Some(Bounds { lo, hi })
    }
}

/// A satisfiability-preserving normal form for a conjunction: parallel
/// linear constraints are merged into one interval per canonical term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub(crate) struct Conj {
    /// Keys have coprime coefficients and a positive leading coefficient.
    pub(crate) bounds: BTreeMap<LinearTerm, Bounds>,
    pub(crate) divs: BTreeSet<(Int, LinearTerm)>,
    pub(crate) ndivs: BTreeSet<(Int, LinearTerm)>,
}

/// Splits `t` into `(key, scale, c)` with `t = scale·key + c`, `key`
/// canonical.
fn canonical(t: &LinearTerm) -> (LinearTerm, Int, Int) {
    let mut g = t.content();
    if t.coeffs()[0].1.is_negative() {
        g = -g;
    }
    let key = LinearTerm::from_sorted(
        t.coeffs().iter().map(|(v, a)| (v.clone(), a.div_exact(&g))).collect(),
        Int::ZERO,
    );
    (key, g, t.constant_part().clone())
}

impl Conj {
    pub(crate) fn is_trivial(&self) -> bool {
        self.bounds.is_empty() && self.divs.is_empty() && self.ndivs.is_empty()
    }

    pub(crate) fn len(&self) -> usize {
        self.bounds.len() + self.divs.len() + self.ndivs.len()
    }

    fn intersect(&mut self, key: LinearTerm, lo: Option<Int>, hi: Option<Int>) -> bool {
        let b = self.bounds.entry(key).or_default();
        if let Some(l) = lo {
            if b.lo.as_ref().is_none_or(|x| *x < l) {
                b.lo = Some(l);
            }
        }
        if let Some(h) = hi {
            if b.hi.as_ref().is_none_or(|x| *x > h) {
                b.hi = Some(h);
            }
        }
        match (&b.lo, &b.hi) {
            (Some(l), Some(h)) => l <= h,
            _ => true,
        }
    }

    /// Conjoins a literal. Returns `false` when the conjunction became
    /// trivially unsatisfiable; the value is then meaningless.
    pub(crate) fn add(&mut self, lit: Lit) -> bool {
        match lit {
            Lit::Le(t) => {
                if t.is_constant() {
                    return !t.constant_part().is_positive();
                }
                let (key, g, c) = canonical(&t);
                // g·key + c <= 0
                if g.is_positive() {
                    let hi = (-c).div_floor(&g);
                    self.intersect(key, None, Some(hi))
                } else {
                    let lo = (-c).div_ceil(&g);
                    self.intersect(key, Some(lo), None)
                }
            }
            Lit::Eq(t) => {
                if t.is_constant() {
                    return t.constant_part().is_zero();
                }
                let (key, g, c) = canonical(&t);
                if !g.divides(&c) {
                    return false;
                }
                let v = (-c).div_exact(&g);
                self.intersect(key, Some(v.clone()), Some(v))
            }
            Lit::Div(m, t) => match Formula::divides(m, t) {
                Formula::True => true,
                Formula::Atom(Atom::Div(m, t)) => {
                    let e = (m, t);
                    if self.ndivs.contains(&e) {
                        return false;
                    }
                    self.divs.insert(e);
                    true
                }
                _ => false,
            },
            Lit::NDiv(m, t) => match Formula::divides(m, t) {
                Formula::False => true,
                Formula::Atom(Atom::Div(m, t)) => {
                    if m == Int::from(2) {
                        return self.add(Lit::Div(m, t.add_constant(&Int::ONE)));
                    }
                    let e = (m, t);
                    if self.divs.contains(&e) {
                        return false;
                    }
                    self.ndivs.insert(e);
                    true
                }
                _ => false,
            },
        }
    }

    pub(crate) fn with(&self, lit: Lit) -> Option<Conj> {
        let mut c = self.clone();
        c.add(lit).then_some(c)
    }

    pub(crate) fn merge(&self, other: &Conj) -> Option<Conj> {
        let (mut big, small) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for l in small.lits() {
            if !big.add(l) {
                return None;
            }
        }
        Some(big)
    }

    pub(crate) fn lits(&self) -> Vec<Lit> {
        let mut out = Vec::with_capacity(self.len() + 1);
        for (key, b) in &self.bounds {
            match (&b.lo, &b.hi) {
                (Some(l), Some(h)) if l == h => out.push(Lit::Eq(key.add_constant(&-l))),
                _ => {
                    if let Some(l) = &b.lo {
                        out.push(Lit::Le(key.negate().add_constant(l)));
                    }
                    if let Some(h) = &b.hi {
                        out.push(Lit::Le(key.add_constant(&-h)));
                    }
                }
            }
        }
        for (m, t) in &self.divs {
            out.push(Lit::Div(m.clone(), t.clone()));
        }
        for (m, t) in &self.ndivs {
            out.push(Lit::NDiv(m.clone(), t.clone()));
        }
        out
    }

    pub(crate) fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Option<Conj> {
        let mut c = Conj::default();
        for l in lits {
            if !c.add(l) {
                return None;
            }
        }
        Some(c)
    }

    pub(crate) fn to_formula(&self) -> Formula {
        Formula::and(self.lits().iter().map(Lit::to_formula))
    }

    pub(crate) fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for k in self.bounds.keys() {
            out.extend(k.vars().cloned());
        }
        for (_, t) in self.divs.iter().chain(self.ndivs.iter()) {
            out.extend(t.vars().cloned());
        }
        out
    }

    pub(crate) fn mentions(&self, x: &Var) -> bool {
        self.bounds.keys().any(|k| k.mentions(x))
            || self.divs.iter().chain(self.ndivs.iter()).any(|(_, t)| t.mentions(x))
    }

    /// Splits into the part not mentioning `x` and the literals that do.
    pub(crate) fn split(&self, x: &Var) -> (Conj, Vec<Lit>) {
        let mut rest = Conj::default();
        let mut with = Vec::new();
        for (key, b) in &self.bounds {
            if key.mentions(x) {
                let single = Conj {
                    bounds: [(key.clone(), b.clone())].into_iter().collect(),
                    ..Conj::default()
                };
                with.extend(single.lits());
            } else {
                rest.bounds.insert(key.clone(), b.clone());
            }
        }
        for e in &self.divs {
            if e.1.mentions(x) {
                with.push(Lit::Div(e.0.clone(), e.1.clone()));
            } else {
                rest.divs.insert(e.clone());
            }
        }
        for e in &self.ndivs {
            if e.1.mentions(x) {
                with.push(Lit::NDiv(e.0.clone(), e.1.clone()));
            } else {
                rest.ndivs.insert(e.clone());
            }
        }
        (rest, with)
    }

    /// Substitutes terms for variables, re-normalizing. `None` if the result
    /// is trivially unsatisfiable.
    pub(crate) fn substitute(&self, map: &BTreeMap<Var, LinearTerm>) -> Option<Conj> {
        let mut out = Conj::default();
        for l in self.lits() {
            let l2 = l.map(|t| t.substitute(map));
            if !out.add(l2) {
                return None;
            }
        }
        Some(out)
    }

    /// Syntactic entailment: every constraint of `other` is implied by a
    /// constraint of `self` on the same canonical term.
    pub(crate) fn implies(&self, other: &Conj) -> bool {
        other
            .bounds
            .iter()
            .all(|(k, b)| self.bounds.get(k).is_some_and(|mine| mine.within(b)))
            && other.divs.is_subset(&self.divs)
            && other.ndivs.is_subset(&self.ndivs)
    }

    /// Merges two conjunctions that differ only in the interval of one key.
    pub(crate) fn try_union(&self, other: &Conj) -> Option<Conj> {
        if self.divs != other.divs || self.ndivs != other.ndivs {
            return None;
        }
        if self.bounds.len() != other.bounds.len() {
            return None;
        }
        let mut diff = None;
        for ((k1, b1), (k2, b2)) in self.bounds.iter().zip(other.bounds.iter()) {
            if k1 != k2 {
                return None;
            }
            if b1 != b2 {
                if diff.is_some() {
                    return None;
                }
                diff = Some((k1, b1.union(b2)?));
            }
        }
        let mut out = self.clone();
        if let Some((k, b)) = diff {
            if b.lo.is_none() && b.hi.is_none() {
                out.bounds.remove(k);
            } else {
                out.bounds.insert(k.clone(), b);
            }
        }
        Some(out)
    }

    /// For a conjunction mentioning only `x`, the smallest-magnitude
    /// solution near the lower end of its interval.
    pub(crate) fn solve_single(&self, x: &Var) -> Option<Int> {
        let mut lo: Option<Int> = None;
        let mut hi: Option<Int> = None;
        for (key, b) in &self.bounds {
            debug_assert!(key.coeffs().len() == 1 && &key.coeffs()[0].0 == x);
            let a = key.coeff(x);
            debug_assert!(a.is_one());
            if let Some(l) = &b.lo {
                if lo.as_ref().is_none_or(|v| v < l) {
                    lo = Some(l.clone());
                }
            }
            if let Some(h) = &b.hi {
                if hi.as_ref().is_none_or(|v| v > h) {
                    hi = Some(h.clone());
                }
            }
        }
        let mut period = Int::ONE;
        for (m, _) in self.divs.iter().chain(self.ndivs.iter()) {
            period = period.lcm(m);
        }
        let start = match (&lo, &hi) {
            (Some(l), _) => l.clone(),
            (None, Some(h)) => {
                let back = h - &(&period - &Int::ONE);
                if back.is_negative() {
                    back
                } else {
                    Int::ZERO
                }
            }
            (None, None) => Int::ZERO,
        };
        let mut cand = start;
        let mut steps = Int::ZERO;
        while steps < period {
            if let Some(h) = &hi {
                if &cand > h {
                    return None;
                }
            }
            let val = |v: &Var| (v == x).then(|| cand.clone());
            let ok = self
                .divs
                .iter()
                .all(|(m, t)| m.divides(&t.eval(&val).expect("single variable")))
                && self
                    .ndivs
                    .iter()
                    .all(|(m, t)| !m.divides(&t.eval(&val).expect("single variable")));
            if ok {
                return Some(cand);
            }
            cand = &cand + &Int::ONE;
            steps = &steps + &Int::ONE;
        }
        None
    }
}
