//! Presburger arithmetic: terms, formulas and decision procedures.

mod conj;
mod formula;
mod simplify;
mod solver;
mod state;
mod term;

pub use formula::{fresh_var, Atom, EvalError, Formula};
pub use simplify::simplify;
pub use solver::{PresburgerError, Result, Solver, DEFAULT_NODE_LIMIT};
pub use state::StateVector;
pub use term::{LinearTerm, Var, CONTROL};

/// Evaluates `f` on a state (and optionally a successor for primed names).
pub fn evaluate(
    solver: &Solver<'_>,
    f: &Formula,
    s: &StateVector,
    s_primed: Option<&StateVector>,
) -> Result<bool> {
    solver.evaluate(f, &|v: &Var| s.lookup_pair(s_primed, v))
}
