mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use counterctl_core::flatten::{enumerate_flattenings, trace_inclusion_check, Flattening, TraceCheck};
use counterctl_core::oracle::{self, explore, DEFAULT_CAP};
use counterctl_core::presburger::{Formula, Solver, StateVector};
use counterctl_core::reach::{Budget, FrozenClock, Session};
use counterctl_core::system::CounterSystem;
use proptest::prelude::*;

fn edges(fl: &Flattening) -> Vec<(u32, usize, u32)> {
    fl.system().transitions().iter().zip(fl.copy_of_transition()).map(|(t, &o)| (t.source(), o, t.target())).collect()
}

fn at_origin(fl: &Flattening, s: &StateVector) -> StateVector {
    StateVector { control: fl.copy_of_control()[s.control as usize], counters: s.counters.clone() }
}

/// Every trace of `m1` of at most `depth` steps from `s` can be replayed in
/// `n` starting from some copy of `s`'s control.
fn replays(m1: &CounterSystem, fl: &Flattening, s: &StateVector, depth: usize) -> bool {
    let copies: BTreeSet<StateVector> = fl
        .copy_of_control()
        .iter()
        .enumerate()
        .filter(|(_, &o)| o == s.control)
        .map(|(j, _)| StateVector { control: j as u32, counters: s.counters.clone() })
        .collect();
    type Memo = HashMap<(StateVector, BTreeSet<StateVector>, usize), bool>;
    fn go(m1: &CounterSystem, fl: &Flattening, s: &StateVector, at: &BTreeSet<StateVector>, depth: usize, memo: &mut Memo) -> bool {
        if at.is_empty() {
            return false;
        }
        if depth == 0 {
            return true;
        }
        let key = (s.clone(), at.clone(), depth);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let mut ok = true;
        for t in oracle::successors(m1, s).unwrap() {
            let next: BTreeSet<StateVector> = at
                .iter()
                .flat_map(|c| oracle::successors(fl.system(), c).unwrap())
                .filter(|c| at_origin(fl, c) == t)
                .collect();
            if !go(m1, fl, &t, &next, depth - 1, memo) {
                ok = false;
                break;
            }
        }
        memo.insert(key, ok);
        ok
    }
    go(m1, fl, s, &copies, depth, &mut HashMap::new())
}

fn small_system(seed: u64) -> CounterSystem {
    let mut r = rng(seed);
    loop {
        let m = random_system(&mut r);
        if m.counters().len() == 1 && m.transitions().len() <= 4 {
            return m;
        }
    }
}

#[test]
fn fig1c_shape_is_enumerated_at_length_four() {
    let m1 = fig1a().refine(&f("x < 10"));
    let target: BTreeSet<(u32, usize, u32)> = [(0, 0, 0), (0, 1, 1), (1, 0, 2), (2, 1, 1)].into_iter().collect();
    let found = enumerate_flattenings(&Solver::default(), &m1, 4).iter().any(|fl| {
        let e = edges(fl);
        permutations(3).iter().any(|p| {
            let mapped: BTreeSet<(u32, usize, u32)> = e.iter().map(|&(s, o, d)| (p[s as usize], o, p[d as usize])).collect();
            mapped == target
        })
    });
    assert!(found);
}

fn permutations(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn enumeration_is_deterministic() {
    let m1 = fig1a().refine(&f("x < 10"));
    let s = Solver::default();
    for len in 1..=4 {
        let a: Vec<_> = enumerate_flattenings(&s, &m1, len).iter().map(edges).collect();
        let b: Vec<_> = enumerate_flattenings(&s, &m1, len).iter().map(edges).collect();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }
}

#[test]
fn running_example_flattening_passes_the_check() {
    let m1 = fig1a().refine(&f("x < 10"));
    let clock = FrozenClock;
    let session = Session::new(&clock, Budget::default());
    let phi = f("x < 10 && !(q = 0 && x >= 0 && x < 5)");
    let holds = enumerate_flattenings(session.solver(), &m1, 4)
        .iter()
        .any(|fl| trace_inclusion_check(&m1, fl, &phi, &session) == TraceCheck::Holds);
    assert!(holds);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flattenings_are_flat_and_add_no_traces(seed in any::<u64>()) {
        let m = small_system(seed);
        let s = Solver::default();
        for len in 1..=3 {
            for fl in enumerate_flattenings(&s, &m, len) {
                prop_assert!(fl.is_flat());
                prop_assert_eq!(fl.length(), len);
                let g = explore(fl.system(), &Formula::True, 0, 4, DEFAULT_CAP).unwrap();
                for st in g.states() {
                    let origin = oracle::successors(&m, &at_origin(&fl, st)).unwrap();
                    for t in oracle::successors(fl.system(), st).unwrap() {
                        prop_assert!(origin.contains(&at_origin(&fl, &t)));
                    }
                }
            }
        }
    }

    #[test]
    fn inclusion_check_is_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = small_system(seed);
        let names: Vec<&str> = m.counters().iter().map(|v| v.as_str()).collect();
        let phi = f(&random_atom(&mut r, &names));
        let m1 = m.refine(&phi);
        let clock = FrozenClock;
        let session = Session::new(&clock, Budget::default());
        let g = explore(&m1, &phi, 0, 6, DEFAULT_CAP).unwrap();
        for len in 1..=3 {
            for fl in enumerate_flattenings(session.solver(), &m1, len) {
                if trace_inclusion_check(&m1, &fl, &phi, &session) != TraceCheck::Holds {
                    continue;
                }
                for st in g.states() {
                    if holds(&phi, st) && st.counters.values().all(|v| *v <= 6.into()) {
                        prop_assert!(replays(&m1, &fl, st, 8), "{} not replayed", st);
                    }
                }
            }
        }
    }
}
