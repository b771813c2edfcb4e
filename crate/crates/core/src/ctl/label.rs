use core::fmt;

use crate::presburger::Formula;
use crate::reach::Stats;

/// Direction of approximation of a computed state set.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ApproxLabel {
    Under,
    Precise,
    Over,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot join an under-approximation with an over-approximation")]
pub struct LabelConflict;

impl ApproxLabel {
    /// Least upper bound; `precise` is the bottom element.
    pub fn join(self, other: ApproxLabel) -> Result<ApproxLabel, LabelConflict> {
        use ApproxLabel::*;
        match (self, other) {
            (Precise, x) | (x, Precise) => Ok(x),
            (Under, Under) => Ok(Under),
            (Over, Over) => Ok(Over),
            _ => Err(LabelConflict),
        }
    }

    pub fn negate(self) -> ApproxLabel {
        match self {
            ApproxLabel::Under => ApproxLabel::Over,
            ApproxLabel::Over => ApproxLabel::Under,
            ApproxLabel::Precise => ApproxLabel::Precise,
        }
    }

    /// `self ⊑ other`
    pub fn below(self, other: ApproxLabel) -> bool {
        self == other || self == ApproxLabel::Precise
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ApproxLabel::Under => "under",
            ApproxLabel::Precise => "precise",
            ApproxLabel::Over => "over",
        }
    }
}

impl fmt::Display for ApproxLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for ApproxLabel {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "under" => Ok(ApproxLabel::Under),
            "precise" => Ok(ApproxLabel::Precise),
            "over" => Ok(ApproxLabel::Over),
            _ => Err(()),
        }
    }
}

/// A state set with its approximation label and the work spent on it.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub formula: Formula,
    pub label: ApproxLabel,
    pub stats: Stats,
}

impl CheckResult {
    pub fn new(formula: Formula, label: ApproxLabel, stats: Stats) -> CheckResult {
        CheckResult { formula, label, stats }
    }

    pub fn is_precise(&self) -> bool {
        self.label == ApproxLabel::Precise
    }
}
