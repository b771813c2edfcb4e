use alloc::vec::Vec;
use core::cell::RefCell;

use super::label::{ApproxLabel, CheckResult, LabelConflict};
use super::logic::CtlFormula;
use crate::eg_over::compute_global_over;
use crate::eg_under::{compute_global_under, EgRun};
use crate::presburger::{simplify, Formula};
use crate::reach::{post_star, pre_star, Budget, Clock, Session, Stats, Stop};
use crate::system::{CounterSystem, ReachTag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("time limit expired before a precise answer was found")]
    BudgetExceededPrecise,
    #[error(transparent)]
    LabelConflict(#[from] LabelConflict),
    #[error("budget limits must be positive")]
    InvalidBudget,
}

/// Which EG routine to use.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Engine {
    /// Under-approximating routine for `under` requests, the
    /// over-approximating one otherwise.
    #[default]
    Auto,
    Under,
    Over,
}

impl core::str::FromStr for Engine {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "auto" => Ok(Engine::Auto),
            "under" => Ok(Engine::Under),
            "over" => Ok(Engine::Over),
            _ => Err(()),
        }
    }
}

/// Snapshots of one EG computation.
#[derive(Clone, Debug)]
pub struct EgTrace {
    pub routine: &'static str,
    pub phi: Formula,
    pub history: Vec<Formula>,
}

/// Global CTL model checker over a counter system.
///
/// Construction completes stuck states with a dead control, resolves the
/// reachable states (the system's hint when exact or over, else `post*` of
/// the initial states) and strengthens every guard with them.
pub struct Checker<'c> {
    system: CounterSystem,
    reach: Formula,
    reach_tag: ReachTag,
    engine: Engine,
    session: Session<'c>,
    traces: RefCell<Vec<EgTrace>>,
}

impl<'c> Checker<'c> {
    pub fn new(m: &CounterSystem, clock: &'c dyn Clock, budget: Budget, engine: Engine) -> Result<Checker<'c>, CheckError> {
        if !budget.is_valid() {
            return Err(CheckError::InvalidBudget);
        }
        let session = Session::new(clock, budget);
        let completed = m.complete_stuck();
        let (reach, reach_tag) = match (m.reach_hint(), m.reach_tag()) {
            (Some(h), ReachTag::Exact | ReachTag::Over) => (h.clone(), m.reach_tag()),
            _ => {
                let sub = session.share(1, 3);
                let r = post_star(&completed, completed.init(), &sub);
                session.absorb(&sub);
                match r {
                    Ok(r) if r.is_precise() => (r.formula, ReachTag::Exact),
                    _ => {
                        session.note("reachable states unknown; using all control states");
                        (completed.domain(), ReachTag::Over)
                    }
                }
            }
        };
        let reach = session.solver().normalize(&reach).unwrap_or(reach);
        let refined = completed.refine_compact(session.solver(), &reach).unwrap_or_else(|_| completed.refine(&reach));
        let system = refined.with_reach_hint(reach.clone(), reach_tag);
        Ok(Checker { system, reach, reach_tag, engine, session, traces: RefCell::new(Vec::new()) })
    }

    /// The completed system with reach-strengthened guards.
    pub fn system(&self) -> &CounterSystem {
        &self.system
    }

    pub fn reach(&self) -> &Formula {
        &self.reach
    }

    pub fn reach_tag(&self) -> ReachTag {
        self.reach_tag
    }

    pub fn stats(&self) -> Stats {
        self.session.stats()
    }

    pub fn eg_traces(&self) -> Vec<EgTrace> {
        self.traces.borrow().clone()
    }

    /// States of `psi` among the reachable ones, with a label below `label`.
    pub fn sat(&self, psi: &CtlFormula, label: ApproxLabel) -> Result<CheckResult, CheckError> {
        let r = self.sat_in(psi, label, &self.session)?;
        Ok(CheckResult::new(r.0, r.1, self.session.stats()))
    }

    /// Like [`Checker::sat`], under a fresh budget that starts now.
    pub fn sat_with(&self, psi: &CtlFormula, label: ApproxLabel, budget: Budget) -> Result<CheckResult, CheckError> {
        if !budget.is_valid() {
            return Err(CheckError::InvalidBudget);
        }
        let session = Session::new(self.session.clock(), budget);
        let r = self.sat_in(psi, label, &session);
        self.session.absorb(&session);
        let r = r?;
        Ok(CheckResult::new(r.0, r.1, session.stats()))
    }

    fn restrict(&self, f: Formula, session: &Session<'_>) -> Formula {
        let g = Formula::and2(self.reach.clone(), f);
        session.solver().normalize(&g).unwrap_or_else(|_| simplify(&g))
    }

    /// The fallback answer when a bounded computation is cut short.
    fn fallback(&self, label: ApproxLabel, over: Formula) -> Result<(Formula, ApproxLabel), CheckError> {
        match label {
            ApproxLabel::Under => Ok((Formula::False, ApproxLabel::Under)),
            ApproxLabel::Over => Ok((over, ApproxLabel::Over)),
            ApproxLabel::Precise => Err(CheckError::BudgetExceededPrecise),
        }
    }

    fn sat_in(&self, psi: &CtlFormula, label: ApproxLabel, session: &Session<'_>) -> Result<(Formula, ApproxLabel), CheckError> {
        let size = psi.size() as u32;
        let child = |c: &CtlFormula, l: ApproxLabel| {
            let sub = session.share(c.size() as u32, size);
            let r = self.sat_in(c, l, &sub);
            session.absorb(&sub);
            r
        };
        match psi {
            CtlFormula::Prop(f) => Ok((self.restrict(f.clone(), session), ApproxLabel::Precise)),
            CtlFormula::Not(a) => {
                let (f, l) = child(a, label.negate())?;
                Ok((self.restrict(Formula::not(f), session), l.negate()))
            }
            CtlFormula::Or(a, b) => {
                let (fa, la) = child(a, label)?;
                let (fb, lb) = child(b, label)?;
                let f = Formula::or2(fa, fb);
                let f = session.solver().normalize(&f).unwrap_or_else(|_| simplify(&f));
                Ok((f, la.join(lb)?))
            }
            CtlFormula::EX(a) => {
                let (f, l) = child(a, label)?;
                let work = if label == ApproxLabel::Precise { session.unbounded() } else { session.same() };
                let r = self.system.pre_image(work.solver(), &f);
                session.absorb(&work);
                match r {
                    Ok(g) => Ok((self.restrict(g, session), l)),
                    Err(_) => {
                        let (g, l2) = self.fallback(label, self.reach.clone())?;
                        Ok((g, l.join(l2)?))
                    }
                }
            }
            CtlFormula::EU(a, b) => {
                let (fa, la) = child(a, label)?;
                let (fb, lb) = child(b, label)?;
                let r = self.until_in(&fa, &fb, label, session)?;
                Ok((r.formula, la.join(lb)?.join(r.label)?))
            }
            CtlFormula::EG(a) => {
                let (f, l) = child(a, label)?;
                let r = self.global_in(&f, label, session)?;
                Ok((r.formula, l.join(r.label)?))
            }
        }
    }

    /// `E[phi1 U phi2]` as `pre*` of `phi2` in the system refined by `phi1`.
    pub fn compute_until(&self, phi1: &Formula, phi2: &Formula, label: ApproxLabel) -> Result<CheckResult, CheckError> {
        self.until_in(phi1, phi2, label, &self.session)
    }

    fn until_in(&self, phi1: &Formula, phi2: &Formula, label: ApproxLabel, session: &Session<'_>) -> Result<CheckResult, CheckError> {
        let m1 = self.system.refine(phi1);
        let work = if label == ApproxLabel::Precise { session.unbounded() } else { session.same() };
        let r = pre_star(&m1, phi2, &work);
        session.absorb(&work);
        let stats = work.stats();
        match r {
            Ok(r) if r.is_precise() => Ok(CheckResult::new(self.restrict(r.formula, session), ApproxLabel::Precise, stats)),
            Ok(r) => match label {
                ApproxLabel::Under => Ok(CheckResult::new(self.restrict(r.formula, session), ApproxLabel::Under, stats)),
                ApproxLabel::Over => {
                    let f = self.restrict(Formula::or2(phi1.clone(), phi2.clone()), session);
                    Ok(CheckResult::new(f, ApproxLabel::Over, stats))
                }
                ApproxLabel::Precise => Err(CheckError::BudgetExceededPrecise),
            },
            Err(_) => Err(CheckError::BudgetExceededPrecise),
        }
    }

    /// `EG phi`, dispatched on the requested label and the engine choice.
    pub fn compute_global(&self, phi: &Formula, label: ApproxLabel) -> Result<CheckResult, CheckError> {
        self.global_in(phi, label, &self.session)
    }

    fn global_in(&self, phi: &Formula, label: ApproxLabel, session: &Session<'_>) -> Result<CheckResult, CheckError> {
        if simplify(phi).is_false() {
            return Ok(CheckResult::new(Formula::False, ApproxLabel::Precise, Stats::default()));
        }
        let under = match (label, self.engine) {
            (ApproxLabel::Under, _) => true,
            (ApproxLabel::Over, _) => false,
            (ApproxLabel::Precise, e) => e == Engine::Under,
        };
        let work = if label == ApproxLabel::Precise { session.unbounded() } else { session.same() };
        let run: Result<EgRun, Stop> = if under {
            compute_global_under(&self.system, phi, &work)
        } else {
            compute_global_over(&self.system, phi, &self.reach, &work)
        };
        session.absorb(&work);
        let run = run.map_err(|_| CheckError::BudgetExceededPrecise)?;
        self.traces.borrow_mut().push(EgTrace {
            routine: if under { "under" } else { "over" },
            phi: phi.clone(),
            history: run.history,
        });
        let r = run.result;
        if label == ApproxLabel::Precise && !r.is_precise() {
            return Err(CheckError::BudgetExceededPrecise);
        }
        Ok(CheckResult::new(self.restrict(r.formula, session), r.label, r.stats))
    }
}
