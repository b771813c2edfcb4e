use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::conj::{Conj, Lit};
use super::formula::{Atom, Formula};
use crate::int::Int;

/// Cheap equivalence-preserving cleanup: constant folding, flattening,
/// duplicate removal, and merging of parallel bounds inside conjunctions.
/// Idempotent.
pub fn simplify(f: &Formula) -> Formula {
    let mut cur = simplify_once(f);
    for _ in 0..16 {
        let next = simplify_once(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn as_lit(f: &Formula) -> Option<Lit> {
    match f {
        Formula::Atom(a) => Lit::from_atom(a, true).pop(),
        Formula::Not(g) => match &**g {
            Formula::Atom(a @ (Atom::Le(_) | Atom::Div(..))) => Lit::from_atom(a, false).pop(),
            _ => None,
        },
        _ => None,
    }
}

fn simplify_once(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => match simplify_once(g) {
            Formula::Atom(Atom::Le(t)) => Formula::le_zero(t.negate().add_constant(&Int::ONE)),
            s => Formula::not(s),
        },
        Formula::Implies(a, b) => Formula::implies(simplify_once(a), simplify_once(b)),
        Formula::Exists(v, b) => Formula::exists(v.clone(), simplify_once(b)),
        Formula::Forall(v, b) => Formula::forall(v.clone(), simplify_once(b)),
        Formula::And(fs) => {
            let flat = Formula::and(fs.iter().map(simplify_once));
            let Formula::And(parts) = flat else {
                return flat;
            };
            let mut conj = Conj::default();
            let mut others: BTreeSet<Formula> = BTreeSet::new();
            for p in parts {
                match as_lit(&p) {
                    Some(l) => {
                        if !conj.add(l) {
                            return Formula::False;
                        }
                    }
                    None => {
                        others.insert(p);
                    }
                }
            }
            for o in &others {
                if others.contains(&Formula::not(o.clone())) {
                    return Formula::False;
                }
            }
            let mut out: Vec<Formula> = conj.lits().iter().map(Lit::to_formula).collect();
            out.extend(others);
            Formula::and(out)
        }
        Formula::Or(fs) => {
            let flat = Formula::or(fs.iter().map(simplify_once));
            let Formula::Or(parts) = flat else {
                return flat;
            };
            let set: BTreeSet<Formula> = parts.into_iter().collect();
            for o in &set {
                if set.contains(&Formula::not(o.clone())) {
                    return Formula::True;
                }
            }
            Formula::or(set)
        }
    }
}
