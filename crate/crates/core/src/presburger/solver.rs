//! Quantifier elimination, satisfiability and entailment.
//!
//! Formulas are brought into disjunctive normal form over [`Conj`]s (negation
//! is pushed inward on the fly). Variables are eliminated from one
//! conjunction at a time, choosing among exact equality substitution,
//! dropping one-sided bounds, exact Fourier-Motzkin when every bound pair has
//! a unit coefficient, and Cooper's method otherwise.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cell::Cell;

use super::conj::{Conj, Lit};
use super::formula::Formula;
use super::term::{LinearTerm, Var};
use crate::int::Int;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PresburgerError {
    #[error("decision procedure exceeded its node budget")]
    ResourceExhausted,
    #[error("decision procedure interrupted")]
    Interrupted,
    #[error("unbound variable `{0}`")]
    UnboundVariable(Var),
}

pub type Result<T> = core::result::Result<T, PresburgerError>;

pub const DEFAULT_NODE_LIMIT: u64 = 1_000_000;

/// Largest disjunctive form built in one step, whatever the node limit.
pub const MAX_DNF_LEN: usize = 1 << 18;

/// Entry point for all decision procedures.
///
/// Every public call gets a fresh node budget. The optional interrupt hook is
/// polled periodically; when it returns `true` the running call fails with
/// [`PresburgerError::Interrupted`].
pub struct Solver<'a> {
    node_limit: u64,
    interrupt: Option<Rc<dyn Fn() -> bool + 'a>>,
    nodes: Cell<u64>,
    total_nodes: Cell<u64>,
    calls: Cell<u64>,
}

impl Default for Solver<'_> {
    fn default() -> Self {
        Solver::new(DEFAULT_NODE_LIMIT)
    }
}

/// One step of a satisfiability search, kept for witness reconstruction.
struct Frame {
    before: Conj,
    var: Var,
}

impl<'a> Solver<'a> {
    pub fn new(node_limit: u64) -> Solver<'a> {
        Solver {
            node_limit: node_limit.max(1),
            interrupt: None,
            nodes: Cell::new(0),
            total_nodes: Cell::new(0),
            calls: Cell::new(0),
        }
    }

    pub fn with_interrupt(mut self, hook: impl Fn() -> bool + 'a) -> Solver<'a> {
        self.interrupt = Some(Rc::new(hook));
        self
    }

    pub fn node_limit(&self) -> u64 {
        self.node_limit
    }

    /// Number of top-level calls served so far.
    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn total_nodes(&self) -> u64 {
        self.total_nodes.get()
    }

    fn begin(&self) -> Result<()> {
        self.calls.set(self.calls.get() + 1);
        self.nodes.set(0);
        self.poll()
    }

    fn poll(&self) -> Result<()> {
        match &self.interrupt {
            Some(h) if h() => Err(PresburgerError::Interrupted),
            _ => Ok(()),
        }
    }

    fn tick(&self) -> Result<()> {
        let n = self.nodes.get() + 1;
        self.nodes.set(n);
        self.total_nodes.set(self.total_nodes.get() + 1);
        if n > self.node_limit {
            return Err(PresburgerError::ResourceExhausted);
        }
        if n % 512 == 0 {
            self.poll()?;
        }
        Ok(())
    }

    // ----- public API -------------------------------------------------

    /// A quantifier-free equivalent of `f`.
    pub fn eliminate_quantifiers(&self, f: &Formula) -> Result<Formula> {
        self.begin()?;
        self.qe(f)
    }

    pub fn is_satisfiable(&self, f: &Formula) -> Result<bool> {
        Ok(self.model(f)?.is_some())
    }

    /// A satisfying assignment of the free variables, if any.
    pub fn model(&self, f: &Formula) -> Result<Option<BTreeMap<Var, Int>>> {
        self.begin()?;
        let free = f.free_vars();
        let dnf = self.dnf(f, true)?;
        for c in &dnf {
            if let Some(mut m) = self.solve_conj(c)? {
                for v in &free {
                    m.entry(v.clone()).or_insert(Int::ZERO);
                }
                m.retain(|v, _| free.contains(v));
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    /// `a ⊨ b`, i.e. `a ∧ ¬b` is unsatisfiable.
    pub fn entails(&self, a: &Formula, b: &Formula) -> Result<bool> {
        self.begin()?;
        let da = self.dnf(a, true)?;
        if da.is_empty() {
            return Ok(true);
        }
        let db = self.dnf(b, true)?;
        for c in &da {
            if !self.conj_outside_sat(c, &db)? {
                continue;
            }
            return Ok(false);
        }
        Ok(true)
    }

    pub fn equivalent(&self, a: &Formula, b: &Formula) -> Result<bool> {
        Ok(self.entails(a, b)? && self.entails(b, a)?)
    }

    /// `∃ vars. f`, quantifier-free.
    pub fn project(&self, vars: &[Var], f: &Formula) -> Result<Formula> {
        self.begin()?;
        let dnf = self.dnf(f, true)?;
        let out = self.project_dnf(vars, dnf)?;
        Ok(dnf_formula(&self.reduce(out)?))
    }

    /// Simplified disjunctive form with unsatisfiable disjuncts removed.
    pub fn normalize(&self, f: &Formula) -> Result<Formula> {
        self.begin()?;
        let dnf = self.dnf(f, true)?;
        let mut live = Vec::new();
        for c in dnf {
            if self.solve_conj(&c)?.is_some() {
                live.push(c);
            }
        }
        Ok(dnf_formula(&self.reduce(live)?))
    }

    /// Truth value of `f` under `lookup`. Quantified subformulas are decided
    /// after the free variables are replaced by their values.
    pub fn evaluate<F>(&self, f: &Formula, lookup: &F) -> Result<bool>
    where
        F: Fn(&Var) -> Option<Int>,
    {
        let mut subst = BTreeMap::new();
        for v in f.free_vars() {
            match lookup(&v) {
                Some(x) => {
                    subst.insert(v, LinearTerm::constant(x));
                }
                None => return Err(PresburgerError::UnboundVariable(v)),
            }
        }
        let closed = f.substitute(&subst);
        if closed.is_quantifier_free() {
            return closed
                .eval_qf(&|_: &Var| None)
                .map_err(|_| PresburgerError::ResourceExhausted);
        }
        self.is_satisfiable(&closed)
    }

    // ----- normal forms -------------------------------------------------

    fn qe(&self, f: &Formula) -> Result<Formula> {
        if f.is_quantifier_free() {
            return Ok(f.clone());
        }
        Ok(match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.qe(g)?),
            Formula::And(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for g in fs {
                    out.push(self.qe(g)?);
                }
                Formula::and(out)
            }
            Formula::Or(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for g in fs {
                    out.push(self.qe(g)?);
                }
                Formula::or(out)
            }
            Formula::Implies(a, b) => Formula::implies(self.qe(a)?, self.qe(b)?),
            Formula::Exists(..) => {
                let (vars, body) = peel(f, true);
                let body = self.qe(body)?;
                let dnf = self.dnf(&body, true)?;
                dnf_formula(&self.reduce(self.project_dnf(&vars, dnf)?)?)
            }
            Formula::Forall(..) => {
                let (vars, body) = peel(f, false);
                let body = self.qe(body)?;
                let dnf = self.dnf(&body, false)?;
                Formula::not(dnf_formula(&self.reduce(self.project_dnf(&vars, dnf)?)?))
            }
        })
    }

    /// DNF of `f` (or of `¬f` when `positive` is false).
    pub(crate) fn dnf(&self, f: &Formula, positive: bool) -> Result<Vec<Conj>> {
        self.tick()?;
        Ok(match (f, positive) {
            (Formula::True, true) | (Formula::False, false) => alloc::vec![Conj::default()],
            (Formula::True, false) | (Formula::False, true) => Vec::new(),
            (Formula::Atom(a), p) => Lit::from_atom(a, p)
                .into_iter()
                .filter_map(|l| Conj::from_lits([l]))
                .collect(),
            (Formula::Not(g), p) => self.dnf(g, !p)?,
            (Formula::And(fs), true) | (Formula::Or(fs), false) => {
                let mut parts = Vec::with_capacity(fs.len());
                for g in fs {
                    let d = self.dnf(g, positive)?;
                    if d.is_empty() {
                        return Ok(Vec::new());
                    }
                    parts.push(d);
                }
                self.product(parts)?
            }
            (Formula::Or(fs), true) | (Formula::And(fs), false) => {
                let mut out = Vec::new();
                for g in fs {
                    out.extend(self.dnf(g, positive)?);
                }
                self.reduce(out)?
            }
            (Formula::Implies(a, b), true) => {
                let mut out = self.dnf(a, false)?;
                out.extend(self.dnf(b, true)?);
                self.reduce(out)?
            }
            (Formula::Implies(a, b), false) => {
                let da = self.dnf(a, true)?;
                if da.is_empty() {
                    return Ok(Vec::new());
                }
                let db = self.dnf(b, false)?;
                self.product(alloc::vec![da, db])?
            }
            (Formula::Exists(..) | Formula::Forall(..), p) => {
                let g = self.qe(f)?;
                self.dnf(&g, p)?
            }
        })
    }

    fn product(&self, mut parts: Vec<Vec<Conj>>) -> Result<Vec<Conj>> {
        parts.sort_by_key(Vec::len);
        let mut acc = alloc::vec![Conj::default()];
        for part in parts {
            let size = acc.len().saturating_mul(part.len());
            if size > MAX_DNF_LEN {
                return Err(PresburgerError::ResourceExhausted);
            }
            let mut next = Vec::with_capacity(size);
            for a in &acc {
                for b in &part {
                    self.tick()?;
                    if let Some(m) = a.merge(b) {
                        next.push(m);
                    }
                }
            }
            acc = self.reduce(next)?;
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    /// Deduplicates, drops syntactically subsumed disjuncts and merges
    /// disjuncts that differ in a single interval.
    pub(crate) fn reduce(&self, dnf: Vec<Conj>) -> Result<Vec<Conj>> {
        let set: BTreeSet<Conj> = dnf.into_iter().collect();
        let mut v: Vec<Conj> = set.into_iter().collect();
        if v.iter().any(Conj::is_trivial) {
            return Ok(alloc::vec![Conj::default()]);
        }
        if v.len() > 2000 {
            return Ok(v);
        }
        loop {
            let mut changed = false;
            // subsumption: drop c if it implies some other d
            let mut keep = alloc::vec![true; v.len()];
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if i != j && keep[j] && keep[i] && v[i].implies(&v[j]) {
                        self.tick()?;
                        keep[i] = false;
                        changed = true;
                    }
                }
            }
            let mut w: Vec<Conj> = v
                .into_iter()
                .zip(keep)
                .filter_map(|(c, k)| k.then_some(c))
                .collect();
            if w.len() <= 300 {
                'outer: for i in 0..w.len() {
                    for j in (i + 1)..w.len() {
                        if let Some(u) = w[i].try_union(&w[j]) {
                            self.tick()?;
                            w[i] = u;
                            w.remove(j);
                            changed = true;
                            break 'outer;
                        }
                    }
                }
            }
            v = w;
            if v.iter().any(Conj::is_trivial) {
                return Ok(alloc::vec![Conj::default()]);
            }
            if !changed {
                return Ok(v);
            }
        }
    }

    // ----- elimination ---------------------------------------------------

    fn project_dnf(&self, vars: &[Var], dnf: Vec<Conj>) -> Result<Vec<Conj>> {
        let mut out = Vec::new();
        for c in dnf {
            out.extend(self.project_conj(vars, c)?);
        }
        Ok(out)
    }

    fn project_conj(&self, vars: &[Var], c: Conj) -> Result<Vec<Conj>> {
        let mut work = alloc::vec![c];
        let mut done = Vec::new();
        while let Some(c) = work.pop() {
            let pick = vars
                .iter()
                .filter(|v| c.mentions(v))
                .map(|v| (elim_cost(&c, v), v))
                .min_by(|a, b| a.0.cmp(&b.0));
            match pick {
                None => done.push(c),
                Some((_, v)) => {
                    let parts = self.eliminate(v, &c)?;
                    if parts.len() > 1 {
                        work.extend(self.reduce(parts)?);
                    } else {
                        work.extend(parts);
                    }
                }
            }
        }
        Ok(done)
    }

    /// `∃x. c` as a disjunction of conjunctions.
    fn eliminate(&self, x: &Var, c: &Conj) -> Result<Vec<Conj>> {
        self.tick()?;
        let (rest, lits) = c.split(x);
        if lits.is_empty() {
            return Ok(alloc::vec![c.clone()]);
        }

        // Equality: substitute the solved form.
        let eq = lits
            .iter()
            .filter_map(|l| match l {
                Lit::Eq(t) => Some((t.coeff(x).abs(), t)),
                _ => None,
            })
            .min_by(|a, b| a.0.cmp(&b.0));
        if let Some((_, t)) = eq {
            let (a, r) = t.split(x);
            let abs_a = a.abs();
            let sign = Int::from(a.signum());
            let mut out = rest;
            if !abs_a.is_one() && !out.add(Lit::Div(abs_a.clone(), r.clone())) {
                return Ok(Vec::new());
            }
            for l in &lits {
                if let Lit::Eq(u) = l {
                    if u == t {
                        continue;
                    }
                }
                let (b, s) = l.term().split(x);
                // b·x + s with a·x = -r:  |a|(b·x + s) = -b·sign·r + |a|·s
                let nt = s.scale(&abs_a).add_scaled(&r, &-(&b * &sign));
                let nl = match l {
                    Lit::Le(_) => Lit::Le(nt),
                    Lit::Eq(_) => Lit::Eq(nt),
                    Lit::Div(m, _) => Lit::Div(m * &abs_a, nt),
                    Lit::NDiv(m, _) => Lit::NDiv(m * &abs_a, nt),
                };
                if !out.add(nl) {
                    return Ok(Vec::new());
                }
            }
            return Ok(alloc::vec![out]);
        }

        // b·x >= e  /  b·x <= e  /  m | a·x + r
        let mut lowers: Vec<(Int, LinearTerm)> = Vec::new();
        let mut uppers: Vec<(Int, LinearTerm)> = Vec::new();
        let mut periodic: Vec<(bool, Int, Int, LinearTerm)> = Vec::new();
        for l in &lits {
            let (a, r) = l.term().split(x);
            match l {
                Lit::Le(_) => {
                    if a.is_positive() {
                        uppers.push((a, r.negate()));
                    } else {
                        lowers.push((a.abs(), r));
                    }
                }
                Lit::Div(m, _) => periodic.push((true, m.clone(), a, r)),
                Lit::NDiv(m, _) => periodic.push((false, m.clone(), a, r)),
                Lit::Eq(_) => unreachable!(),
            }
        }

        if periodic.is_empty() {
            if lowers.is_empty() || uppers.is_empty() {
                return Ok(alloc::vec![rest]);
            }
            let exact = lowers
                .iter()
                .all(|(bl, _)| bl.is_one() || uppers.iter().all(|(bu, _)| bu.is_one()));
            if exact {
                let mut out = rest;
                for (bl, el) in &lowers {
                    for (bu, eu) in &uppers {
                        // bu·el <= bl·eu
                        let t = el.scale(bu).sub(&eu.scale(bl));
                        if !out.add(Lit::Le(t)) {
                            return Ok(Vec::new());
                        }
                    }
                }
                return Ok(alloc::vec![out]);
            }
        }

        // Cooper: substitute y = δ·x so every coefficient of y is ±1.
        let mut delta = Int::ONE;
        for (b, _) in lowers.iter().chain(uppers.iter()) {
            delta = delta.lcm(b);
        }
        for (_, _, a, _) in &periodic {
            delta = delta.lcm(a);
        }
        let lowers: Vec<LinearTerm> = lowers
            .iter()
            .map(|(b, e)| e.scale(&delta.div_exact(b)))
            .collect();
        let uppers: Vec<LinearTerm> = uppers
            .iter()
            .map(|(b, e)| e.scale(&delta.div_exact(b)))
            .collect();
        // (is_div, modulus, sign of y, remainder)
        let mut per: Vec<(bool, Int, Int, LinearTerm)> = periodic
            .iter()
            .map(|(pos, m, a, r)| {
                let k = delta.div_exact(&a.abs());
                (*pos, m * &k, Int::from(a.signum()), r.scale(&k))
            })
            .collect();
        if !delta.is_one() {
            per.push((true, delta.clone(), Int::ONE, LinearTerm::zero()));
        }
        let mut period = Int::ONE;
        for (_, m, _, _) in &per {
            period = period.lcm(m);
        }

        let instantiate = |y: &LinearTerm, with_bounds: bool| -> Option<Conj> {
            let mut out = rest.clone();
            if with_bounds {
                for e in &lowers {
                    if !out.add(Lit::Le(e.sub(y))) {
                        return None;
                    }
                }
                for e in &uppers {
                    if !out.add(Lit::Le(y.sub(e))) {
                        return None;
                    }
                }
            }
            for (pos, m, s, r) in &per {
                let t = r.add_scaled(y, s);
                let l = if *pos {
                    Lit::Div(m.clone(), t)
                } else {
                    Lit::NDiv(m.clone(), t)
                };
                if !out.add(l) {
                    return None;
                }
            }
            Some(out)
        };

        let mut out = Vec::new();
        let count = period.to_i64().ok_or(PresburgerError::ResourceExhausted)?;
        if lowers.is_empty() || uppers.is_empty() {
            for j in 0..count {
                self.tick()?;
                if let Some(c) = instantiate(&LinearTerm::constant(j), false) {
                    out.push(c);
                }
            }
            return Ok(out);
        }
        let use_lowers = lowers.len() <= uppers.len();
        let cands = if use_lowers { &lowers } else { &uppers };
        for e in cands {
            for j in 0..count {
                self.tick()?;
                let off = if use_lowers { j } else { -j };
                if let Some(c) = instantiate(&e.add_constant(&Int::from(off)), true) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    // ----- satisfiability -------------------------------------------------

    /// A model of `c` over its variables, or `None` if unsatisfiable.
    fn solve_conj(&self, c: &Conj) -> Result<Option<BTreeMap<Var, Int>>> {
        let mut frames: Vec<Frame> = Vec::new();
        match self.search(c.clone(), &mut frames)? {
            false => Ok(None),
            true => {
                let mut model: BTreeMap<Var, Int> = BTreeMap::new();
                for fr in frames.iter().rev() {
                    for v in fr.before.vars() {
                        if v != fr.var && !model.contains_key(&v) {
                            model.insert(v, Int::ZERO);
                        }
                    }
                    let subst: BTreeMap<Var, LinearTerm> = model
                        .iter()
                        .map(|(v, x)| (v.clone(), LinearTerm::constant(x.clone())))
                        .collect();
                    let single = fr
                        .before
                        .substitute(&subst)
                        .expect("back-substitution of a model stays consistent");
                    let val = single
                        .solve_single(&fr.var)
                        .expect("eliminated variable has a solution");
                    model.insert(fr.var.clone(), val);
                }
                Ok(Some(model))
            }
        }
    }

    /// Depth-first elimination of every variable; on success `frames` holds
    /// the path for witness reconstruction.
    fn search(&self, c: Conj, frames: &mut Vec<Frame>) -> Result<bool> {
        let vars = c.vars();
        let pick = vars
            .iter()
            .map(|v| (elim_cost(&c, v), v))
            .min_by(|a, b| a.0.cmp(&b.0));
        let Some((_, v)) = pick else {
            return Ok(true);
        };
        let v = v.clone();
        let parts = self.eliminate(&v, &c)?;
        frames.push(Frame { before: c, var: v });
        let depth = frames.len();
        for p in parts {
            if self.search(p, frames)? {
                return Ok(true);
            }
            frames.truncate(depth);
        }
        frames.pop();
        Ok(false)
    }

    fn conj_sat(&self, c: &Conj) -> Result<bool> {
        self.search(c.clone(), &mut Vec::new())
    }

    /// Whether `c ∧ ¬(d₁ ∨ … ∨ dₙ)` is satisfiable.
    fn conj_outside_sat(&self, c: &Conj, dnf: &[Conj]) -> Result<bool> {
        if !self.conj_sat(c)? {
            return Ok(false);
        }
        let mut frontier = alloc::vec![c.clone()];
        for d in dnf {
            let mut next = Vec::new();
            for s in &frontier {
                if s.implies(d) {
                    continue;
                }
                if s.merge(d).is_none() {
                    next.push(s.clone());
                    continue;
                }
                for l in d.lits() {
                    for nl in l.negate() {
                        self.tick()?;
                        if let Some(n) = s.with(nl) {
                            next.push(n);
                        }
                    }
                }
            }
            frontier = self.reduce(next)?;
            if frontier.len() > 32 {
                let mut live = Vec::new();
                for s in frontier {
                    if self.conj_sat(&s)? {
                        live.push(s);
                    }
                }
                frontier = live;
            }
            if frontier.is_empty() {
                return Ok(false);
            }
        }
        for s in &frontier {
            if self.conj_sat(s)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The DNF of `f` with unsatisfiable disjuncts removed.
    pub(crate) fn live_dnf(&self, f: &Formula) -> Result<Vec<Conj>> {
        let dnf = self.dnf(f, true)?;
        let mut out = Vec::new();
        for c in dnf {
            if self.conj_sat(&c)? {
                out.push(c);
            }
        }
        self.reduce(out)
    }

    /// Disjuncts of `f` (live DNF) not entailed by `g`, as formulas.
    pub fn new_disjuncts(&self, f: &Formula, g: &Formula) -> Result<Vec<Formula>> {
        self.begin()?;
        let df = self.live_dnf(f)?;
        let dg = self.dnf(g, true)?;
        let mut out = Vec::new();
        for c in df {
            if self.conj_outside_sat(&c, &dg)? {
                out.push(c.to_formula());
            }
        }
        Ok(out)
    }

    /// States where `f` holds for infinitely many `k ≥ 0`, decided disjunct
    /// by disjunct: a disjunct with an upper bound or an equation on `k`
    /// contributes nothing, otherwise its lower bounds on `k` are dropped and
    /// `k` is projected out of its divisibility literals. When `f` is
    /// downward closed in `k` on `k ≥ 0` this is `∀k ≥ 0. f`.
    pub fn unbounded_in(&self, f: &Formula, k: &Var) -> Result<Formula> {
        self.begin()?;
        let mut out = Vec::new();
        'disjunct: for c in self.live_dnf(f)? {
            let (rest, with) = c.split(k);
            let mut periodic = Vec::new();
            for l in with {
                match &l {
                    Lit::Le(t) if t.coeff(k).is_positive() => continue 'disjunct,
                    Lit::Le(_) => {}
                    Lit::Eq(_) => continue 'disjunct,
                    Lit::Div(..) | Lit::NDiv(..) => periodic.push(l),
                }
            }
            let Some(p) = Conj::from_lits(periodic) else {
                continue;
            };
            for q in self.project_dnf(core::slice::from_ref(k), alloc::vec![p])? {
                if let Some(m) = rest.merge(&q) {
                    out.push(m);
                }
            }
        }
        Ok(dnf_formula(&self.reduce(out)?))
    }

    /// An equivalent formula with as few disjuncts as cheaply found: a single
    /// conjunction of literals occurring in `f` when one is equivalent,
    /// otherwise the disjuncts that are not covered by the remaining ones.
    pub fn compact(&self, f: &Formula) -> Result<Formula> {
        self.begin()?;
        let parts = self.reduce(self.live_dnf(f)?)?;
        if parts.len() <= 1 {
            return Ok(dnf_formula(&parts));
        }
        let mut candidates: BTreeSet<Lit> = BTreeSet::new();
        for c in &parts {
            for l in c.lits() {
                match l {
                    Lit::Eq(t) => {
                        candidates.insert(Lit::Le(t.negate()));
                        candidates.insert(Lit::Le(t));
                    }
                    l => {
                        candidates.insert(l);
                    }
                }
            }
        }
        let mut hull = Conj::default();
        for l in candidates {
            let lit = alloc::vec![Conj::default().with(l.clone()).unwrap_or_default()];
            if parts.iter().try_fold(true, |ok, c| Ok::<_, PresburgerError>(ok && !self.conj_outside_sat(c, &lit)?))? {
                if let Some(h) = hull.with(l) {
                    hull = h;
                }
            }
        }
        if !self.conj_outside_sat(&hull, &parts)? {
            return Ok(hull.to_formula());
        }
        let mut keep: Vec<Conj> = parts.clone();
        let mut i = 0;
        while i < keep.len() {
            let others: Vec<Conj> = keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.clone()).collect();
            if !self.conj_outside_sat(&keep[i], &others)? {
                keep.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(dnf_formula(&keep))
    }

    /// Live disjuncts of `f` as separate formulas.
    pub fn disjuncts(&self, f: &Formula) -> Result<Vec<Formula>> {
        self.begin()?;
        Ok(self.live_dnf(f)?.iter().map(Conj::to_formula).collect())
    }
}

fn peel(f: &Formula, exists: bool) -> (Vec<Var>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    loop {
        match (cur, exists) {
            (Formula::Exists(v, b), true) | (Formula::Forall(v, b), false) => {
                vars.push(v.clone());
                cur = b;
            }
            _ => return (vars, cur),
        }
    }
}

fn dnf_formula(dnf: &[Conj]) -> Formula {
    Formula::or(dnf.iter().map(Conj::to_formula))
}

/// Rough cost of eliminating `x` from `c`; lower is cheaper.
fn elim_cost(c: &Conj, x: &Var) -> u64 {
    let (_, lits) = c.split(x);
    let mut lo = 0u64;
    let mut hi = 0u64;
    let mut unit_lo = true;
    let mut unit_hi = true;
    let mut periodic = false;
    let mut period = Int::ONE;
    for l in &lits {
        let a = l.term().coeff(x);
        match l {
            Lit::Eq(_) => return if a.abs().is_one() { 1 } else { 2 },
            Lit::Le(_) => {
                if a.is_positive() {
                    hi += 1;
                    unit_hi &= a.is_one();
                } else {
                    lo += 1;
                    unit_lo &= a.abs().is_one();
                }
                period = period.lcm(&a);
            }
            Lit::Div(m, _) | Lit::NDiv(m, _) => {
                periodic = true;
                period = period.lcm(m).lcm(&a);
            }
        }
    }
    if !periodic {
        if lo == 0 || hi == 0 {
            return 3;
        }
        if unit_lo || unit_hi {
            return 10 + lo * hi;
        }
    }
    let p = period.to_i64().unwrap_or(i64::MAX) as u64;
    let side = if lo == 0 || hi == 0 { 1 } else { lo.min(hi) };
    100u64.saturating_add(p.saturating_mul(side).saturating_mul(4))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> LinearTerm {
        LinearTerm::var(n)
    }

    fn c(k: i64) -> LinearTerm {
        LinearTerm::constant(k)
    }

    #[test]
    fn exists_even() {
        let s = Solver::default();
        // exists y. x = 2y  <->  2 | x
        let f = Formula::exists(Var::new("y"), Formula::eq(&v("x"), &v("y").scale(&Int::from(2))));
        let g = s.eliminate_quantifiers(&f).unwrap();
        assert!(g.is_quantifier_free());
        assert!(s.equivalent(&g, &Formula::divides(2, v("x"))).unwrap());
    }

    #[test]
    fn empty_interval() {
        let s = Solver::default();
        let f = Formula::exists(
            Var::new("x"),
            Formula::and([Formula::ge(&v("x"), &c(0)), Formula::le(&v("x"), &c(-1))]),
        );
        assert_eq!(s.eliminate_quantifiers(&f).unwrap(), Formula::False);
    }

    #[test]
    fn witness() {
        let s = Solver::default();
        let f = Formula::and([Formula::ge(&v("x"), &c(0)), Formula::lt(&v("x"), &c(5))]);
        let m = s.model(&f).unwrap().unwrap();
        assert_eq!(m[&Var::new("x")], Int::ZERO);
        assert!(s.model(&Formula::False).unwrap().is_none());
    }

    #[test]
    fn entailment() {
        let s = Solver::default();
        assert!(s.entails(&Formula::eq(&v("x"), &c(3)), &Formula::le(&v("x"), &c(4))).unwrap());
        assert!(!s.entails(&Formula::le(&v("x"), &c(4)), &Formula::eq(&v("x"), &c(3))).unwrap());
    }

    #[test]
    fn cooper_needed() {
        let s = Solver::default();
        // exists y. 3y <= x && x <= 3y + 1 && 2y >= x - 5  (non-unit pairs)
        let y = v("y");
        let f = Formula::exists(
            Var::new("y"),
            Formula::and([
                Formula::le(&y.scale(&Int::from(3)), &v("x")),
                Formula::le(&v("x"), &y.scale(&Int::from(3)).add_constant(&Int::ONE)),
                Formula::ge(&y.scale(&Int::from(2)), &v("x").add_constant(&Int::from(-5))),
            ]),
        );
        let g = s.eliminate_quantifiers(&f).unwrap();
        for x in -20..40i64 {
            let brute = (-30..30i64).any(|y| 3 * y <= x && x <= 3 * y + 1 && 2 * y >= x - 5);
            let env = |_: &Var| Some(Int::from(x));
            assert_eq!(g.eval_qf(&env).unwrap(), brute, "x = {x}");
        }
    }

    #[test]
    fn node_budget() {
        let s = Solver::new(5);
        let f = Formula::exists(
            Var::new("y"),
            Formula::and([
                Formula::divides(7, v("y").add_constant(&Int::from(3))),
                Formula::le(&v("y").scale(&Int::from(5)), &v("x")),
                Formula::le(&v("x"), &v("y").scale(&Int::from(3))),
            ]),
        );
        assert_eq!(s.eliminate_quantifiers(&f), Err(PresburgerError::ResourceExhausted));
    }
}
