use counterctl::{parse_system, print_system, SysFileError};
use counterctl_core::presburger::{Solver, StateVector, Var};
use counterctl_core::system::{ReachTag, Update};

const SAMPLE: &str = "
counters x, y;
nat counters n;
controls 0..2;
init: q = 0 && x = 0 && y = 0 && n = 3;
transition up from 0 to 1 guard x < 10 action x' = x + 1, 0 <= y' <= x;
transition down from 1 to 0 guard n > 0 action n' = n - 1, y' = 2*y - x;
transition idle from 2 to 2;
reach: q <= 2 over;
";

#[test]
fn sample_parses() {
    let m = parse_system(SAMPLE).unwrap();
    assert_eq!(m.counters().len(), 3);
    assert!(m.is_nat(&Var::new("n")));
    assert_eq!(m.controls().len(), 3);
    assert_eq!(m.transitions().len(), 3);
    assert_eq!(m.reach_tag(), ReachTag::Over);
    let up = m.transition("up").unwrap();
    assert!(matches!(up.update(&Var::new("y")), Some(Update::Range(..))));
    assert!(m.transition("idle").unwrap().updates().is_empty());
}

#[test]
fn print_parse_round_trip() {
    let m = parse_system(SAMPLE).unwrap();
    let text = print_system(&m);
    let back = parse_system(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    let s = Solver::default();
    assert_eq!(m.counters(), back.counters());
    assert_eq!(m.controls(), back.controls());
    assert!(s.equivalent(m.init(), back.init()).unwrap());
    for (a, b) in m.transitions().iter().zip(back.transitions()) {
        assert_eq!(a.id(), b.id());
        assert!(s.equivalent(&a.relation(), &b.relation()).unwrap(), "{}", a.id());
    }
    assert_eq!(print_system(&back), text);
}

#[test]
fn concrete_steps_survive_round_trip() {
    let m = parse_system(SAMPLE).unwrap();
    let back = parse_system(&print_system(&m)).unwrap();
    let s = Solver::default();
    let st = |q, x: i64, y: i64, n: i64| {
        StateVector::new(q, [(Var::new("x"), x.into()), (Var::new("y"), y.into()), (Var::new("n"), n.into())])
    };
    for (a, b) in [(st(0, 2, 0, 3), st(1, 3, 1, 3)), (st(1, 2, 1, 1), st(0, 2, 0, 0)), (st(1, 2, 1, 0), st(0, 2, 0, -1))] {
        assert_eq!(m.is_step(&s, &a, &b).unwrap(), back.is_step(&s, &a, &b).unwrap());
    }
    assert!(!m.is_step(&s, &st(1, 2, 1, 0), &st(0, 2, 0, -1)).unwrap());
}

#[test]
fn errors_have_positions() {
    match parse_system("counters x;\ncontrols 0;\ninit x = 0;\n") {
        Err(SysFileError::Parse(e)) => assert_eq!((e.line, e.column), (3, 6)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_system("counters x;\ncontrols 0;\ntransition t from 0 to 4;\n"), Err(SysFileError::System(_))));
    assert!(parse_system("counters x;\ncontrols 0;\ntransition t from 0 to 0 action x'' = 1;\n").is_err());
}
