#![allow(dead_code)]

use std::time::Instant;

use counterctl_core::ctl::CtlFormula;
use counterctl_core::int::Int;
use counterctl_core::oracle;
use counterctl_core::presburger::{Formula, LinearTerm, Solver, StateVector, Var};
use counterctl_core::reach::Clock;
use counterctl_core::syntax::parse_formula;
use counterctl_core::system::{CounterSystem, SystemBuilder, Update};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

pub fn equiv(a: &Formula, b: &Formula) -> bool {
    Solver::default().equivalent(a, b).unwrap()
}

pub fn inc(v: &str, by: i64) -> (Var, Update) {
    (Var::new(v), Update::Assign(LinearTerm::var(v).add_constant(&by.into())))
}

pub fn set(v: &str, to: i64) -> (Var, Update) {
    (Var::new(v), Update::Assign(LinearTerm::constant(to)))
}

pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> WallClock {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> core::time::Duration {
        self.0.elapsed()
    }
}

pub fn fig1a() -> CounterSystem {
    SystemBuilder::new()
        .counter("x")
        .control(0)
        .init(f("x = 0"))
        .transition("t0", 0, 0, f("x >= 0 && x < 100"), [inc("x", 1)])
        .transition("t1", 0, 0, f("x > 0 && x < 5"), [inc("x", -1)])
        .build()
        .unwrap()
}

/// The flattening of the refined running example with copies q00, q01, q02.
pub fn fig1c() -> CounterSystem {
    let g0 = "x >= 0 && x < 100 && x < 10";
    let g1 = "x > 0 && x < 5 && x < 10";
    SystemBuilder::new()
        .counter("x")
        .controls([0, 1, 2])
        .transition("t00", 0, 0, f(g0), [inc("x", 1)])
        .transition("t10", 0, 1, f(g1), [inc("x", -1)])
        .transition("t01", 1, 2, f(g0), [inc("x", 1)])
        .transition("t11", 2, 1, f(g1), [inc("x", -1)])
        .build()
        .unwrap()
}

/// Truth of `f` at `s` with extra variables fixed.
pub fn holds_with(f: &Formula, s: &StateVector, extra: &[(Var, i64)]) -> bool {
    let mut g = f.clone();
    for (v, x) in extra {
        g = g.substitute_var(v, &LinearTerm::constant(*x));
    }
    oracle::holds(&g, s).unwrap()
}

pub fn holds(f: &Formula, s: &StateVector) -> bool {
    holds_with(f, s, &[])
}

pub fn state(q: u32, vals: &[(&str, i64)]) -> StateVector {
    StateVector::new(q, vals.iter().map(|(v, x)| (Var::new(*v), Int::from(*x))))
}

pub const NAMES: [&str; 3] = ["x", "y", "z"];

/// A random system with counters kept in `[0, 30]` by its guards.
pub fn random_system(rng: &mut StdRng) -> CounterSystem {
    let nc = rng.gen_range(1..=3);
    let nq = rng.gen_range(1..=3u32);
    let nt = rng.gen_range(1..=6);
    let names = &NAMES[..nc];
    let mut b = SystemBuilder::new();
    for n in names {
        b.counter(n);
    }
    b.controls(0..nq);
    let init: Vec<String> = names.iter().map(|n| format!("{n} = {}", rng.gen_range(0..=3))).collect();
    b.init(f(&format!("q = 0 && {}", init.join(" && "))));
    for i in 0..nt {
        let mut guard: Vec<String> = names.iter().map(|n| format!("0 <= {n} && {n} <= 30")).collect();
        for _ in 0..rng.gen_range(0..=2) {
            guard.push(random_atom(rng, names));
        }
        let mut ups = Vec::new();
        for n in names {
            match rng.gen_range(0..6) {
                0 | 1 => ups.push(inc(n, [1, -1][rng.gen_range(0..2)])),
                2 => ups.push(set(n, rng.gen_range(0..=4))),
                _ => {}
            }
        }
        let src = rng.gen_range(0..nq);
        let tgt = rng.gen_range(0..nq);
        b.transition(&format!("t{i}"), src, tgt, f(&guard.join(" && ")), ups);
    }
    b.build().unwrap()
}

pub fn random_atom(rng: &mut StdRng, names: &[&str]) -> String {
    let a = names[rng.gen_range(0..names.len())];
    let c = rng.gen_range(0..=30);
    match rng.gen_range(0..6) {
        0 => format!("{a} <= {c}"),
        1 => format!("{a} >= {c}"),
        2 => format!("{a} = {}", c % 8),
        3 => format!("2 | {a}"),
        4 if names.len() > 1 => {
            let b = names[(names.iter().position(|n| *n == a).unwrap() + 1) % names.len()];
            format!("{a} - {b} <= {}", c % 5)
        }
        _ => format!("{a} < {c}"),
    }
}

/// A random flat system: a chain of controls, each with at most one
/// self-loop, plus forward edges, counters kept in `[0, 12]`.
pub fn random_flat(r: &mut StdRng) -> CounterSystem {
    let nc = r.gen_range(1..=2);
    let names = &NAMES[..nc];
    let nq = r.gen_range(1..=3u32);
    let mut b = SystemBuilder::new();
    for n in names {
        b.counter(n);
    }
    b.controls(0..nq);
    let bound: Vec<String> = names.iter().map(|n| format!("0 <= {n} && {n} <= 12")).collect();
    let mut i = 0;
    let mut add = |b: &mut SystemBuilder, r: &mut StdRng, s: u32, t: u32| {
        let mut g = bound.clone();
        if r.gen_bool(0.5) {
            g.push(random_atom(r, names).replace("30", "12"));
        }
        let mut ups = Vec::new();
        for n in names {
            match r.gen_range(0..4) {
                0 => ups.push(inc(n, 1)),
                1 => ups.push(inc(n, -1)),
                2 if s != t => ups.push(set(n, r.gen_range(0..=3))),
                _ => {}
            }
        }
        b.transition(&format!("t{i}"), s, t, f(&g.join(" && ")), ups);
        i += 1;
    };
    for q in 0..nq {
        if r.gen_bool(0.7) {
            add(&mut b, r, q, q);
        }
        for t in q + 1..nq {
            if r.gen_bool(0.6) {
                add(&mut b, r, q, t);
            }
        }
    }
    b.build().unwrap()
}

/// A random formula in existential normal form of the given depth.
pub fn random_enf(rng: &mut StdRng, names: &[&str], nq: u32, depth: u32) -> CtlFormula {
    let leaf = |rng: &mut StdRng| {
        let s = if rng.gen_bool(0.2) {
            format!("q = {}", rng.gen_range(0..nq))
        } else {
            random_atom(rng, names)
        };
        CtlFormula::prop(f(&s))
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..6) {
        0 => CtlFormula::not(random_enf(rng, names, nq, depth - 1)),
        1 => CtlFormula::or(random_enf(rng, names, nq, depth - 1), random_enf(rng, names, nq, depth - 1)),
        2 => CtlFormula::ex(random_enf(rng, names, nq, depth - 1)),
        3 => CtlFormula::eu(random_enf(rng, names, nq, depth - 1), random_enf(rng, names, nq, depth - 1)),
        4 => CtlFormula::eg(random_enf(rng, names, nq, depth - 1)),
        _ => leaf(rng),
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
