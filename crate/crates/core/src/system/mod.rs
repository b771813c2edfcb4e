//! Counter systems: control states, counters and guarded transitions.

mod graph;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::int::Int;
use crate::presburger::{
    fresh_var, simplify, Formula, LinearTerm, Result as QeResult, Solver, StateVector, Var,
};

pub use graph::ControlGraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("no control states declared")]
    NoControls,
    #[error("counter `{0}` declared twice")]
    DuplicateCounter(Var),
    #[error("`{0}` cannot be used as a counter name")]
    ReservedCounter(Var),
    #[error("transition `{0}` declared twice")]
    DuplicateTransition(String),
    #[error("transition `{transition}` refers to undeclared control {control}")]
    UnknownControl { transition: String, control: u32 },
    #[error("{context}: unknown variable `{var}`")]
    UnknownVariable { context: String, var: Var },
    #[error("transition `{transition}` updates `{var}` twice")]
    DuplicateUpdate { transition: String, var: Var },
    #[error("trace step {index} is not a transition of the system")]
    InvalidStep { index: usize },
    #[error("empty trace")]
    EmptyTrace,
    #[error("state {0} does not match the counters of the system")]
    StateShape(usize),
    #[error(transparent)]
    Presburger(#[from] crate::presburger::PresburgerError),
}

/// New value of one counter.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Update {
    /// `x' = t`
    Assign(LinearTerm),
    /// `lo <= x' <= hi`
    Range(LinearTerm, LinearTerm),
}

impl Update {
    fn constraint(&self, primed: &Var) -> Formula {
        let p = LinearTerm::var(primed.clone());
        match self {
            Update::Assign(t) => Formula::eq(&p, t),
            Update::Range(lo, hi) => Formula::and2(Formula::le(lo, &p), Formula::le(&p, hi)),
        }
    }

    fn terms(&self) -> [&LinearTerm; 2] {
        match self {
            Update::Assign(t) => [t, t],
            Update::Range(lo, hi) => [lo, hi],
        }
    }
}

/// Where a reachability hint came from.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ReachTag {
    Exact,
    Over,
    Under,
    Absent,
}

impl ReachTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ReachTag::Exact => "exact",
            ReachTag::Over => "over",
            ReachTag::Under => "under",
            ReachTag::Absent => "absent",
        }
    }
}

impl fmt::Display for ReachTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transition {
    id: Arc<str>,
    source: u32,
    target: u32,
    local_guard: Formula,
    updates: BTreeMap<Var, Update>,
    guard: Formula,
    action: Formula,
}

impl Transition {
    fn new(
        id: &str,
        source: u32,
        target: u32,
        guard: Formula,
        updates: BTreeMap<Var, Update>,
        counters: &[Var],
    ) -> Transition {
        let local_guard = simplify(&guard.substitute_var(&Var::control(), &LinearTerm::constant(source)));
        let full_guard = Formula::and2(Formula::var_eq(&Var::control(), source), local_guard.clone());
        let updates: BTreeMap<Var, Update> = updates
            .into_iter()
            .map(|(v, u)| {
                let fix = |t: &LinearTerm| t.substitute_var(&Var::control(), &LinearTerm::constant(source));
                let u = match u {
                    Update::Assign(t) => Update::Assign(fix(&t)),
                    Update::Range(lo, hi) => Update::Range(fix(&lo), fix(&hi)),
                };
                (v, u)
            })
            .filter(|(v, u)| *u != Update::Assign(LinearTerm::var(v.clone())))
            .collect();
        let mut parts = alloc::vec![Formula::eq(&LinearTerm::var(Var::control().primed()), &LinearTerm::constant(target))];
        for c in counters {
            parts.push(match updates.get(c) {
                Some(u) => u.constraint(&c.primed()),
                None => Formula::vars_eq(&c.primed(), c),
            });
        }
        Transition {
            id: Arc::from(id),
            source,
            target,
            local_guard,
            updates,
            guard: full_guard,
            action: Formula::and(parts),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn source(&self) -> u32 {
        self.source
    }

    pub fn target(&self) -> u32 {
        self.target
    }

    /// Guard including `q = source`.
    pub fn guard(&self) -> &Formula {
        &self.guard
    }

    /// Guard without the control conjunct (`q` already replaced by the source).
    pub fn local_guard(&self) -> &Formula {
        &self.local_guard
    }

    /// Action including `q' = target`; unlisted counters keep their value.
    pub fn action(&self) -> &Formula {
        &self.action
    }

    /// Non-identity updates.
    pub fn updates(&self) -> &BTreeMap<Var, Update> {
        &self.updates
    }

    pub fn update(&self, v: &Var) -> Option<&Update> {
        self.updates.get(v)
    }

    /// True when every counter gets a single new value.
    pub fn is_functional(&self) -> bool {
        self.updates.values().all(|u| matches!(u, Update::Assign(_)))
    }

    /// `guard ∧ action`
    pub fn relation(&self) -> Formula {
        Formula::and2(self.guard.clone(), self.action.clone())
    }

    /// The same guard and updates between other controls. The guard keeps
    /// the meaning it had at the original source.
    pub(crate) fn relocated(&self, id: &str, source: u32, target: u32, counters: &[Var]) -> Transition {
        Transition::new(id, source, target, self.local_guard.clone(), self.updates.clone(), counters)
    }

    fn with_guard(&self, local_guard: Formula, counters: &[Var]) -> Transition {
        Transition::new(&self.id, self.source, self.target, local_guard, self.updates.clone(), counters)
    }

    /// States with a successor in `f` through this transition. `f` may
    /// mention variables other than the state variables; they are kept.
    pub fn pre(&self, solver: &Solver<'_>, f: &Formula) -> QeResult<Formula> {
        let mut taken = f.all_vars();
        taken.extend(self.updates.keys().cloned());
        let mut map = BTreeMap::new();
        map.insert(Var::control(), LinearTerm::constant(self.target));
        let mut side = Vec::new();
        let mut fresh = Vec::new();
        for (v, u) in &self.updates {
            match u {
                Update::Assign(t) => {
                    map.insert(v.clone(), t.clone());
                }
                Update::Range(lo, hi) => {
                    let r = fresh_var(&v.primed(), &taken);
                    taken.insert(r.clone());
                    let rt = LinearTerm::var(r.clone());
                    side.push(Formula::le(lo, &rt));
                    side.push(Formula::le(&rt, hi));
                    map.insert(v.clone(), rt);
                    fresh.push(r);
                }
            }
        }
        let moved = f.substitute(&map);
        let mut parts = alloc::vec![self.guard.clone(), moved];
        parts.extend(side);
        let body = Formula::and(parts);
        let out = if fresh.is_empty() && body.is_quantifier_free() {
            body
        } else if fresh.is_empty() {
            solver.eliminate_quantifiers(&body)?
        } else {
            solver.project(&fresh, &body)?
        };
        Ok(simplify(&out))
    }

    /// Successors through this transition of states in `f`. Variables of `f`
    /// other than the state variables are kept.
    pub fn post(&self, solver: &Solver<'_>, f: &Formula, counters: &[Var]) -> QeResult<Formula> {
        let mut taken = f.all_vars();
        taken.extend(counters.iter().cloned());
        taken.insert(Var::control());
        let mut old = BTreeMap::new();
        for c in counters {
            let o = fresh_var(c, &taken);
            taken.insert(o.clone());
            old.insert(c.clone(), LinearTerm::var(o));
        }
        let mut parts = alloc::vec![
            f.substitute_var(&Var::control(), &LinearTerm::constant(self.source)).substitute(&old),
            self.local_guard.substitute(&old),
            Formula::var_eq(&Var::control(), self.target),
        ];
        for c in counters {
            let cur = LinearTerm::var(c.clone());
            parts.push(match self.updates.get(c) {
                Some(Update::Assign(t)) => Formula::eq(&cur, &t.substitute(&old)),
                Some(Update::Range(lo, hi)) => Formula::and2(
                    Formula::le(&lo.substitute(&old), &cur),
                    Formula::le(&cur, &hi.substitute(&old)),
                ),
                None => Formula::eq(&cur, &old[c]),
            });
        }
        let vars: Vec<Var> = old
            .values()
            .map(|t| t.coeffs()[0].0.clone())
            .collect();
        let body = Formula::and(parts);
        let out = solver.project(&vars, &body)?;
        Ok(simplify(&out))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CounterSystem {
    controls: BTreeSet<u32>,
    counters: Vec<Var>,
    nat: BTreeSet<Var>,
    transitions: Vec<Transition>,
    init: Formula,
    reach_hint: Option<(Formula, ReachTag)>,
}

/// Incremental construction of a [`CounterSystem`]; [`SystemBuilder::build`]
/// validates names and control references.
#[derive(Clone, Default, Debug)]
pub struct SystemBuilder {
    controls: BTreeSet<u32>,
    counters: Vec<Var>,
    nat: BTreeSet<Var>,
    transitions: Vec<(String, u32, u32, Formula, Vec<(Var, Update)>)>,
    init: Option<Formula>,
    reach_hint: Option<(Formula, ReachTag)>,
}

impl SystemBuilder {
    pub fn new() -> SystemBuilder {
        SystemBuilder::default()
    }

    pub fn counter(&mut self, name: &str) -> &mut Self {
        self.counters.push(Var::new(name));
        self
    }

    /// A counter ranging over the naturals.
    pub fn nat_counter(&mut self, name: &str) -> &mut Self {
        self.counters.push(Var::new(name));
        self.nat.insert(Var::new(name));
        self
    }

    pub fn control(&mut self, q: u32) -> &mut Self {
        self.controls.insert(q);
        self
    }

    pub fn controls(&mut self, qs: impl IntoIterator<Item = u32>) -> &mut Self {
        self.controls.extend(qs);
        self
    }

    pub fn init(&mut self, f: Formula) -> &mut Self {
        self.init = Some(f);
        self
    }

    pub fn reach_hint(&mut self, f: Formula, tag: ReachTag) -> &mut Self {
        self.reach_hint = if tag == ReachTag::Absent { None } else { Some((f, tag)) };
        self
    }

    /// Adds a transition; counters without an update keep their value.
    pub fn transition(
        &mut self,
        id: &str,
        source: u32,
        target: u32,
        guard: Formula,
        updates: impl IntoIterator<Item = (Var, Update)>,
    ) -> &mut Self {
        self.transitions
            .push((String::from(id), source, target, guard, updates.into_iter().collect()));
        self
    }

    pub fn build(&self) -> Result<CounterSystem, SystemError> {
        if self.controls.is_empty() {
            return Err(SystemError::NoControls);
        }
        let mut seen = BTreeSet::new();
        for c in &self.counters {
            if c.is_control() || c.primes() > 0 {
                return Err(SystemError::ReservedCounter(c.clone()));
            }
            if !seen.insert(c.clone()) {
                return Err(SystemError::DuplicateCounter(c.clone()));
            }
        }
        let mut state_vars = seen.clone();
        state_vars.insert(Var::control());
        let check = |context: &dyn Fn() -> String, f: &Formula, allowed: &BTreeSet<Var>| {
            match f.free_vars().into_iter().find(|v| !allowed.contains(v)) {
                Some(var) => Err(SystemError::UnknownVariable { context: context(), var }),
                None => Ok(()),
            }
        };
        let init = self.init.clone().unwrap_or(Formula::True);
        check(&|| String::from("init"), &init, &state_vars)?;
        let nat = self.nat_constraint();
        let init = simplify(&Formula::and([control_set_formula(&self.controls), init, nat.clone()]));

        let mut ids = BTreeSet::new();
        let mut transitions = Vec::new();
        for (id, s, t, g, ups) in &self.transitions {
            if !ids.insert(id.clone()) {
                return Err(SystemError::DuplicateTransition(id.clone()));
            }
            for &c in [s, t] {
                if !self.controls.contains(&c) {
                    return Err(SystemError::UnknownControl { transition: id.clone(), control: c });
                }
            }
            check(&|| format!("guard of `{id}`"), g, &state_vars)?;
            let mut updates = BTreeMap::new();
            for (v, u) in ups {
                if !seen.contains(v) {
                    return Err(SystemError::UnknownVariable {
                        context: format!("action of `{id}`"),
                        var: v.clone(),
                    });
                }
                for term in u.terms() {
                    if let Some(var) = term.vars().find(|w| !state_vars.contains(*w)) {
                        return Err(SystemError::UnknownVariable {
                            context: format!("action of `{id}`"),
                            var: var.clone(),
                        });
                    }
                }
                if updates.insert(v.clone(), u.clone()).is_some() {
                    return Err(SystemError::DuplicateUpdate { transition: id.clone(), var: v.clone() });
                }
            }
            let mut g = Formula::and2(g.clone(), nat.clone());
            for (v, u) in &updates {
                if !self.nat.contains(v) {
                    continue;
                }
                let low = match u {
                    Update::Assign(e) => e,
                    Update::Range(lo, _) => lo,
                };
                g = Formula::and2(g, Formula::ge(low, &LinearTerm::zero()));
            }
            transitions.push(Transition::new(id, *s, *t, g, updates, &self.counters));
        }
        if let Some((h, _)) = &self.reach_hint {
            check(&|| String::from("reach"), h, &state_vars)?;
        }
        Ok(CounterSystem {
            controls: self.controls.clone(),
            counters: self.counters.clone(),
            nat: self.nat.clone(),
            transitions,
            init,
            reach_hint: self.reach_hint.clone(),
        })
    }

    fn nat_constraint(&self) -> Formula {
        Formula::and(
            self.counters
                .iter()
                .filter(|c| self.nat.contains(*c))
                .map(|c| Formula::ge(&LinearTerm::var(c.clone()), &LinearTerm::zero())),
        )
    }
}

impl CounterSystem {
    pub(crate) fn from_parts(
        controls: BTreeSet<u32>,
        counters: Vec<Var>,
        transitions: Vec<Transition>,
        init: Formula,
    ) -> CounterSystem {
        CounterSystem { controls, counters, nat: BTreeSet::new(), transitions, init, reach_hint: None }
    }

    pub fn controls(&self) -> &BTreeSet<u32> {
        &self.controls
    }

    pub fn counters(&self) -> &[Var] {
        &self.counters
    }

    pub fn is_nat(&self, c: &Var) -> bool {
        self.nat.contains(c)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id() == id)
    }

    pub fn init(&self) -> &Formula {
        &self.init
    }

    pub fn reach_hint(&self) -> Option<&Formula> {
        self.reach_hint.as_ref().map(|(f, _)| f)
    }

    pub fn reach_tag(&self) -> ReachTag {
        self.reach_hint.as_ref().map_or(ReachTag::Absent, |(_, t)| *t)
    }

    pub fn with_reach_hint(&self, f: Formula, tag: ReachTag) -> CounterSystem {
        let mut m = self.clone();
        m.reach_hint = if tag == ReachTag::Absent { None } else { Some((f, tag)) };
        m
    }

    pub fn with_init(&self, init: Formula) -> CounterSystem {
        let mut m = self.clone();
        m.init = init;
        m.reach_hint = None;
        m
    }

    /// The system with only the transitions satisfying `keep`.
    pub fn retain_transitions(&self, mut keep: impl FnMut(&Transition) -> bool) -> CounterSystem {
        let mut m = self.clone();
        m.transitions.retain(|t| keep(t));
        m
    }

    /// `q ∈ Q` as a formula.
    pub fn domain(&self) -> Formula {
        control_set_formula(&self.controls)
    }

    /// Every guard strengthened with `phi`; the reachability hint is dropped.
    pub fn refine(&self, phi: &Formula) -> CounterSystem {
        let mut m = self.clone();
        m.transitions = self
            .transitions
            .iter()
            .map(|t| {
                let local = phi.substitute_var(&Var::control(), &LinearTerm::constant(t.source));
                t.with_guard(Formula::and2(t.local_guard.clone(), local), &self.counters)
            })
            .collect();
        m.reach_hint = None;
        m
    }

    /// [`refine`](Self::refine) with every strengthened guard passed through
    /// [`Solver::compact`], which keeps accelerations on the convex path
    /// when `phi` is a redundant disjunction.
    pub fn refine_compact(&self, solver: &Solver<'_>, phi: &Formula) -> QeResult<CounterSystem> {
        let mut m = self.clone();
        let mut out = Vec::with_capacity(self.transitions.len());
        for t in &self.transitions {
            let local = phi.substitute_var(&Var::control(), &LinearTerm::constant(t.source));
            let g = solver.compact(&Formula::and2(t.local_guard.clone(), local))?;
            out.push(t.with_guard(g, &self.counters));
        }
        m.transitions = out;
        m.reach_hint = None;
        Ok(m)
    }

    /// States with a successor in `phi`, quantifier-free.
    pub fn pre_image(&self, solver: &Solver<'_>, phi: &Formula) -> QeResult<Formula> {
        let phi = if phi.is_quantifier_free() { phi.clone() } else { solver.eliminate_quantifiers(phi)? };
        if phi.is_false() {
            return Ok(Formula::False);
        }
        let mut parts = Vec::with_capacity(self.transitions.len());
        for t in &self.transitions {
            parts.push(t.pre(solver, &phi)?);
        }
        Ok(simplify(&Formula::or(parts)))
    }

    /// Successors of states in `phi`, quantifier-free.
    pub fn post_image(&self, solver: &Solver<'_>, phi: &Formula) -> QeResult<Formula> {
        if phi.is_false() {
            return Ok(Formula::False);
        }
        let mut parts = Vec::with_capacity(self.transitions.len());
        for t in &self.transitions {
            parts.push(t.post(solver, phi, &self.counters)?);
        }
        Ok(simplify(&Formula::or(parts)))
    }

    /// States with no enabled transition: `¬(g_1 ∨ … ∨ g_n)`.
    pub fn stuck_states(&self) -> Formula {
        simplify(&Formula::not(Formula::or(self.transitions.iter().map(|t| t.guard.clone()))))
    }

    /// Adds a dead control with an identity self-loop and, from every
    /// control, an identity transition into it enabled exactly on the stuck
    /// states. The result has no stuck states.
    pub fn complete_stuck(&self) -> CounterSystem {
        let dead = self.controls.iter().next_back().map_or(0, |&m| m + 1);
        let stuck = self.stuck_states();
        let mut m = self.clone();
        m.controls.insert(dead);
        let taken: BTreeSet<&str> = self.transitions.iter().map(|t| t.id()).collect();
        let name = |stem: String| {
            let mut cand = stem.clone();
            let mut i = 0;
            while taken.contains(cand.as_str()) {
                cand = format!("{stem}_{i}");
                i += 1;
            }
            cand
        };
        for &q in &self.controls {
            let g = stuck.substitute_var(&Var::control(), &LinearTerm::constant(q));
            let g = simplify(&g);
            if g.is_false() {
                continue;
            }
            m.transitions
                .push(Transition::new(&name(format!("stuck_{q}")), q, dead, g, BTreeMap::new(), &self.counters));
        }
        m.transitions
            .push(Transition::new(&name(String::from("dead")), dead, dead, Formula::True, BTreeMap::new(), &self.counters));
        m.reach_hint = None;
        m
    }

    /// Whether `s -> t` is a concrete step of some transition.
    pub fn is_step(&self, solver: &Solver<'_>, s: &StateVector, t: &StateVector) -> QeResult<bool> {
        for tr in &self.transitions {
            if tr.source != s.control || tr.target != t.control {
                continue;
            }
            if crate::presburger::evaluate(solver, &tr.relation(), s, Some(t))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn control_graph(&self) -> ControlGraph {
        ControlGraph::new(self)
    }

    fn shape_ok(&self, s: &StateVector) -> bool {
        s.counters.len() == self.counters.len() && self.counters.iter().all(|c| s.counters.contains_key(c))
    }
}

/// `q ∈ qs` as a union of intervals.
pub fn control_set_formula(qs: &BTreeSet<u32>) -> Formula {
    let q = LinearTerm::var(Var::control());
    let mut parts = Vec::new();
    let mut it = qs.iter().copied().peekable();
    while let Some(lo) = it.next() {
        let mut hi = lo;
        while it.peek() == Some(&(hi + 1)) {
            hi += 1;
            it.next();
        }
        parts.push(if lo == hi {
            Formula::eq(&q, &LinearTerm::constant(lo))
        } else {
            Formula::and2(
                Formula::ge(&q, &LinearTerm::constant(lo)),
                Formula::le(&q, &LinearTerm::constant(hi)),
            )
        });
    }
    Formula::or(parts)
}

/// A finite sequence of states connected by concrete steps.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceSample {
    states: Vec<StateVector>,
}

impl TraceSample {
    pub fn new(m: &CounterSystem, solver: &Solver<'_>, states: Vec<StateVector>) -> Result<TraceSample, SystemError> {
        if states.is_empty() {
            return Err(SystemError::EmptyTrace);
        }
        for (i, s) in states.iter().enumerate() {
            if !m.shape_ok(s) || !m.controls.contains(&s.control) {
                return Err(SystemError::StateShape(i));
            }
        }
        for (i, w) in states.windows(2).enumerate() {
            if !m.is_step(solver, &w[0], &w[1])? {
                return Err(SystemError::InvalidStep { index: i });
            }
        }
        Ok(TraceSample { states })
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Whether the same states form a trace of `m`.
    pub fn valid_in(&self, m: &CounterSystem, solver: &Solver<'_>) -> QeResult<bool> {
        for w in self.states.windows(2) {
            if !m.is_step(solver, &w[0], &w[1])? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A state with the given control and counter values, in counter order.
pub fn state(m: &CounterSystem, control: u32, values: &[i64]) -> StateVector {
    StateVector::new(
        control,
        m.counters.iter().cloned().zip(values.iter().map(|&v| Int::from(v))),
    )
}
