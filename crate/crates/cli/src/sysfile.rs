//! Plain-text system files.
//!
//! ```text
//! counters x, y;
//! nat counters n;
//! controls 0..2;
//! init: x = 0 && y = 0;
//! transition t0 from 0 to 1 guard x < 10 action x' = x + 1, 0 <= y' <= x;
//! reach: q = 0 && x >= 0 exact;
//! ```
//!
//! `guard` and `action` are optional; counters missing from an action keep
//! their value. `controls` also accepts a comma-separated list.

use std::fmt::Write;

use counterctl_core::presburger::{Formula, Var};
use counterctl_core::syntax::{ParseError, Parser, Tok};
use counterctl_core::system::{CounterSystem, ReachTag, SystemBuilder, SystemError, Update};

#[derive(Debug, thiserror::Error)]
pub enum SysFileError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    System(#[from] SystemError),
}

type Res<T> = Result<T, ParseError>;

pub fn parse_system(src: &str) -> Result<CounterSystem, SysFileError> {
    let mut p = Parser::new(src)?;
    let mut b = SystemBuilder::new();
    while !p.at_eof() {
        if p.eat_word("counters") {
            for c in ident_list(&mut p)? {
                b.counter(&c);
            }
        } else if p.eat_word("nat") {
            p.expect_word("counters")?;
            for c in ident_list(&mut p)? {
                b.nat_counter(&c);
            }
        } else if p.eat_word("controls") {
            b.controls(control_list(&mut p)?);
        } else if p.eat_word("init") {
            p.expect_sym(":")?;
            b.init(p.formula()?);
        } else if p.eat_word("transition") {
            transition(&mut p, &mut b)?;
        } else if p.eat_word("reach") {
            p.expect_sym(":")?;
            let f = p.formula()?;
            let tag = if p.eat_word("exact") {
                ReachTag::Exact
            } else if p.eat_word("over") {
                ReachTag::Over
            } else if p.eat_word("under") {
                ReachTag::Under
            } else {
                return Err(p.error("expected `exact`, `over` or `under`").into());
            };
            b.reach_hint(f, tag);
        } else {
            return Err(p.error(format!("expected a declaration, found {}", p.peek())).into());
        }
        p.expect_sym(";")?;
    }
    Ok(b.build()?)
}

fn ident_list(p: &mut Parser) -> Res<Vec<String>> {
    let mut v = vec![p.ident()?];
    while p.eat_sym(",") {
        v.push(p.ident()?);
    }
    Ok(v)
}

fn control(p: &mut Parser) -> Res<u32> {
    let n = p.number()?;
    n.to_i64().and_then(|v| u32::try_from(v).ok()).ok_or_else(|| p.error("control out of range"))
}

fn control_list(p: &mut Parser) -> Res<Vec<u32>> {
    let mut v = Vec::new();
    loop {
        let a = control(p)?;
        if p.eat_sym("..") {
            let b = control(p)?;
            v.extend(a..=b);
        } else {
            v.push(a);
        }
        if !p.eat_sym(",") {
            return Ok(v);
        }
    }
}

fn transition(p: &mut Parser, b: &mut SystemBuilder) -> Res<()> {
    let id = p.ident()?;
    p.expect_word("from")?;
    let src = control(p)?;
    p.expect_word("to")?;
    let tgt = control(p)?;
    let guard = if p.eat_word("guard") { p.formula()? } else { Formula::True };
    let mut ups = Vec::new();
    if p.eat_word("action") {
        loop {
            ups.push(update(p)?);
            if !p.eat_sym(",") {
                break;
            }
        }
    }
    b.transition(&id, src, tgt, guard, ups);
    Ok(())
}

fn primed(p: &mut Parser) -> Res<Var> {
    match p.peek().clone() {
        Tok::Ident(s) if s.ends_with('\'') && s.matches('\'').count() == 1 => {
            p.advance();
            Ok(Var::new(s.trim_end_matches('\'')))
        }
        _ => Err(p.error(format!("expected a primed counter, found {}", p.peek()))),
    }
}

fn update(p: &mut Parser) -> Res<(Var, Update)> {
    if matches!(p.peek(), Tok::Ident(s) if s.ends_with('\'')) {
        let v = primed(p)?;
        p.expect_sym("=")?;
        return Ok((v, Update::Assign(p.term()?)));
    }
    let lo = p.term()?;
    p.expect_sym("<=")?;
    let v = primed(p)?;
    p.expect_sym("<=")?;
    let hi = p.term()?;
    Ok((v, Update::Range(lo, hi)))
}

/// Prints `m` in the format read by [`parse_system`].
pub fn print_system(m: &CounterSystem) -> String {
    let mut out = String::new();
    let (nat, int): (Vec<&Var>, Vec<&Var>) = m.counters().iter().partition(|c| m.is_nat(c));
    if !int.is_empty() {
        let names: Vec<&str> = int.iter().map(|v| v.as_str()).collect();
        let _ = writeln!(out, "counters {};", names.join(", "));
    }
    if !nat.is_empty() {
        let names: Vec<&str> = nat.iter().map(|v| v.as_str()).collect();
        let _ = writeln!(out, "nat counters {};", names.join(", "));
    }
    let qs: Vec<u32> = m.controls().iter().copied().collect();
    let contiguous = qs.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous && qs.len() > 1 {
        let _ = writeln!(out, "controls {}..{};", qs[0], qs[qs.len() - 1]);
    } else {
        let list: Vec<String> = qs.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "controls {};", list.join(", "));
    }
    let _ = writeln!(out, "init: {};", m.init());
    for t in m.transitions() {
        let _ = write!(out, "transition {} from {} to {} guard {}", t.id(), t.source(), t.target(), t.local_guard());
        let ups: Vec<String> = t
            .updates()
            .iter()
            .map(|(v, u)| match u {
                Update::Assign(e) => format!("{v}' = {e}"),
                Update::Range(lo, hi) => format!("{lo} <= {v}' <= {hi}"),
            })
            .collect();
        if !ups.is_empty() {
            let _ = write!(out, " action {}", ups.join(", "));
        }
        out.push_str(";\n");
    }
    if let Some(h) = m.reach_hint() {
        let _ = writeln!(out, "reach: {h} {};", m.reach_tag());
    }
    out
}
