//! CTL formulas, the approximation lattice and the global model checker.

mod checker;
mod label;
mod logic;

pub use checker::{CheckError, Checker, EgTrace, Engine};
pub use label::{ApproxLabel, CheckResult, LabelConflict};
pub use logic::{Ctl, CtlFormula};
