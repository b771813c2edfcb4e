use alloc::collections::BTreeMap;
use core::fmt;

use super::term::Var;
use crate::int::Int;

/// A concrete state: a control location and a value for every counter.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateVector {
    pub control: u32,
    pub counters: BTreeMap<Var, Int>,
}

impl StateVector {
    pub fn new(control: u32, counters: impl IntoIterator<Item = (Var, Int)>) -> StateVector {
        StateVector {
            control,
            counters: counters.into_iter().collect(),
        }
    }

    /// Value of an unprimed state variable.
    pub fn get(&self, v: &Var) -> Option<Int> {
        if v.as_str() == super::term::CONTROL {
            Some(Int::from(self.control))
        } else {
            self.counters.get(v).cloned()
        }
    }

    /// Variable lookup for a pair of states: unprimed names read `self`,
    /// singly primed names read `next`.
    pub fn lookup_pair(&self, next: Option<&StateVector>, v: &Var) -> Option<Int> {
        match v.primes() {
            0 => self.get(v),
            1 => next.and_then(|n| n.get(&v.base())),
            _ => None,
        }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}", self.control)?;
        for (v, x) in &self.counters {
            write!(f, ", {v}={x}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
