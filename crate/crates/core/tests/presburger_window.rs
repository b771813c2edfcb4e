//! Window-oracle checks for the decision procedures.
//!
//! The oracle evaluates formulas directly on the syntax tree. Free variables
//! range over a finite window; quantified variables are always generated
//! with an explicit guard `-B <= v <= B` (conjoined under `exists`, as a
//! premise under `forall`), so enumerating `[-B, B]` decides every
//! quantifier exactly: values outside the range make the guarded body
//! false (resp. the implication true) and cannot change the outcome.

use std::collections::BTreeMap;

use counterctl_core::int::Int;
use counterctl_core::presburger::{simplify, Atom, Formula, LinearTerm, Solver, Var};
use proptest::prelude::*;

const W: i64 = 10;
const B: i64 = 12;

fn oracle_term(t: &LinearTerm, env: &BTreeMap<String, i64>) -> i64 {
    let mut acc = t.constant_part().to_i64().unwrap();
    for (v, a) in t.coeffs() {
        acc += a.to_i64().unwrap() * env[v.as_str()];
    }
    acc
}

fn oracle(f: &Formula, env: &mut BTreeMap<String, i64>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(Atom::Le(t)) => oracle_term(t, env) <= 0,
        Formula::Atom(Atom::Eq(t)) => oracle_term(t, env) == 0,
        Formula::Atom(Atom::Div(d, t)) => oracle_term(t, env).rem_euclid(d.to_i64().unwrap()) == 0,
        Formula::Not(g) => !oracle(g, env),
        Formula::And(fs) => fs.iter().all(|g| oracle(g, env)),
        Formula::Or(fs) => fs.iter().any(|g| oracle(g, env)),
        Formula::Implies(a, b) => !oracle(a, env) || oracle(b, env),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let ex = matches!(f, Formula::Exists(..));
            let saved = env.get(v.as_str()).copied();
            let mut result = !ex;
            for val in -B..=B {
                env.insert(v.as_str().to_string(), val);
                let r = oracle(body, env);
                if ex && r {
                    result = true;
                    break;
                }
                if !ex && !r {
                    result = false;
                    break;
                }
            }
            match saved {
                Some(s) => env.insert(v.as_str().to_string(), s),
                None => env.remove(v.as_str()),
            };
            result
        }
    }
}

fn window2() -> impl Iterator<Item = (i64, i64)> {
    (-W..=W).flat_map(|x| (-W..=W).map(move |y| (x, y)))
}

fn env2(x: i64, y: i64) -> BTreeMap<String, i64> {
    [("x".to_string(), x), ("y".to_string(), y)].into_iter().collect()
}

fn term_strategy(vars: Vec<&'static str>) -> impl Strategy<Value = LinearTerm> {
    let n = vars.len();
    (prop::collection::vec(-2i64..=2, n), -8i64..=8).prop_map(move |(cs, k)| {
        LinearTerm::from_parts(
            vars.iter().zip(cs).map(|(v, c)| (Var::new(v), Int::from(c))),
            Int::from(k),
        )
    })
}

fn atom_strategy(vars: Vec<&'static str>) -> impl Strategy<Value = Formula> {
    (term_strategy(vars), 0u8..4, 2i64..=3).prop_map(|(t, kind, d)| match kind {
        0 | 1 => Formula::le_zero(t),
        2 => Formula::eq_zero(t),
        _ => Formula::divides(d, t),
    })
}

fn bounded(v: &str) -> Formula {
    let t = LinearTerm::var(v);
    Formula::and([
        Formula::ge(&t, &LinearTerm::constant(-B)),
        Formula::le(&t, &LinearTerm::constant(B)),
    ])
}

/// Quantifier-free formulas over `vars`.
fn qf_strategy(vars: Vec<&'static str>) -> impl Strategy<Value = Formula> {
    atom_strategy(vars).prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
        ]
    })
}

/// Formulas over free `x, y` with up to two guarded quantifiers over `u, w`.
fn quantified_strategy() -> impl Strategy<Value = Formula> {
    let body = qf_strategy(vec!["x", "y", "u", "w"]);
    (body, 0u8..4, 0u8..3, qf_strategy(vec!["x", "y"])).prop_map(|(b, q1, q2, side)| {
        let wrap = |v: &str, q: u8, f: Formula| -> Formula {
            let var = Var::new(v);
            match q {
                0 => Formula::Exists(var, Box::new(Formula::and([bounded(v), f]))),
                1 => Formula::Forall(var, Box::new(Formula::Implies(Box::new(bounded(v)), Box::new(f)))),
                _ => Formula::and([bounded(v), f]),
            }
        };
        // Free occurrences of a variable left unquantified are pinned by a guard
        // and closed existentially, keeping the free set within {x, y}.
        let inner = wrap("w", q2, b);
        let inner = if q2 >= 2 { Formula::Exists(Var::new("w"), Box::new(inner)) } else { inner };
        let outer = wrap("u", q1 % 3, Formula::or([inner, side]));
        if q1 % 3 == 2 {
            Formula::Exists(Var::new("u"), Box::new(outer))
        } else {
            outer
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, .. ProptestConfig::default() })]

    #[test]
    fn qe_agrees_with_window_oracle(f in quantified_strategy()) {
        let s = Solver::default();
        // Exhausting the node budget is a legitimate outcome; only answers are checked.
        let Ok(g) = s.eliminate_quantifiers(&f) else { return Ok(()) };
        prop_assert!(g.is_quantifier_free());
        for (x, y) in window2() {
            let mut env = env2(x, y);
            let expect = oracle(&f, &mut env);
            let got = oracle(&g, &mut env);
            prop_assert_eq!(expect, got, "x={} y={} f={} qe={}", x, y, f, g);
        }
    }

    #[test]
    fn sat_matches_bounded_enumeration(f in qf_strategy(vec!["x", "y"])) {
        let s = Solver::default();
        let boxed = Formula::and([bounded("x"), bounded("y"), f.clone()]);
        let brute = (-B..=B).any(|x| (-B..=B).any(|y| oracle(&boxed, &mut env2(x, y))));
        let model = s.model(&boxed).unwrap();
        prop_assert_eq!(model.is_some(), brute, "f={}", f);
        if let Some(m) = model {
            let get = |n: &str| m.get(&Var::new(n)).and_then(Int::to_i64).unwrap_or(0);
            prop_assert!(oracle(&boxed, &mut env2(get("x"), get("y"))));
        }
    }

    #[test]
    fn mutual_entailment_means_same_truth_table(
        a in qf_strategy(vec!["x", "y"]),
        b in qf_strategy(vec!["x", "y"]),
    ) {
        let s = Solver::default();
        for (f1, f2) in [(&a, &b), (&a, &Formula::or([a.clone(), b.clone()])), (&Formula::and([a.clone(), b.clone()]), &a)] {
            let fwd = s.entails(f1, f2).unwrap();
            let bwd = s.entails(f2, f1).unwrap();
            if fwd {
                for (x, y) in window2() {
                    let mut env = env2(x, y);
                    prop_assert!(!oracle(f1, &mut env) || oracle(f2, &mut env));
                }
            }
            if fwd && bwd {
                for (x, y) in window2() {
                    let mut env = env2(x, y);
                    prop_assert_eq!(oracle(f1, &mut env), oracle(f2, &mut env));
                }
            }
        }
        // structural facts that must always hold
        prop_assert!(s.entails(&a, &Formula::or([a.clone(), b.clone()])).unwrap());
        prop_assert!(s.entails(&Formula::and([a.clone(), b.clone()]), &b).unwrap());
    }

    #[test]
    fn simplify_is_idempotent_and_equivalent(f in qf_strategy(vec!["x", "y"])) {
        let g = simplify(&f);
        prop_assert_eq!(simplify(&g), g.clone());
        for (x, y) in window2() {
            let mut env = env2(x, y);
            prop_assert_eq!(oracle(&f, &mut env), oracle(&g, &mut env));
        }
    }

    #[test]
    fn normalize_preserves_meaning(f in quantified_strategy()) {
        let s = Solver::default();
        let Ok(g) = s.normalize(&f) else { return Ok(()) };
        for (x, y) in window2() {
            let mut env = env2(x, y);
            prop_assert_eq!(oracle(&f, &mut env), oracle(&g, &mut env));
        }
    }

    #[test]
    fn renaming_round_trip(f in quantified_strategy()) {
        let to: BTreeMap<Var, Var> = [(Var::new("x"), Var::new("u"))].into_iter().collect();
        let back: BTreeMap<Var, Var> = [(Var::new("u"), Var::new("x"))].into_iter().collect();
        let g = f.rename(&to).rename(&back);
        prop_assert!(g.free_vars().is_subset(&f.free_vars()));
        for (x, y) in window2() {
            let mut env = env2(x, y);
            prop_assert_eq!(oracle(&f, &mut env), oracle(&g, &mut env));
        }
    }
}

#[test]
fn universal_k_example_matches_window() {
    // forall k. k >= 0 => x >= 4 - k, with k bounded by the window analysis:
    // the body is monotone in k, so k = 0 is the binding instance.
    let s = Solver::default();
    let f = counterctl_core::syntax::parse_formula("forall k. (k >= 0 => x >= 4 - k)").unwrap();
    let g = s.eliminate_quantifiers(&f).unwrap();
    for x in -10..=10i64 {
        let brute = (0..=10).all(|k| x >= 4 - k);
        let env = |_: &Var| Some(Int::from(x));
        assert_eq!(g.eval_qf(&env).unwrap(), brute, "x = {x}");
    }
}

#[test]
fn evaluate_with_quantifier() {
    let s = Solver::default();
    let f = counterctl_core::syntax::parse_formula("exists y. (x = 2*y)").unwrap();
    let even = |v: i64| move |_: &Var| Some(Int::from(v));
    assert!(s.evaluate(&f, &even(6)).unwrap());
    assert!(!s.evaluate(&f, &even(7)).unwrap());
}
