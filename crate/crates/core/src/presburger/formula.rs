use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use super::term::{LinearTerm, Var};
use crate::int::Int;

/// An atomic constraint. Constructed through [`Formula`] helpers, which keep
/// the term normalized (coprime coefficients, reduced residues).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    /// `t <= 0`
    Le(LinearTerm),
    /// `t = 0`
    Eq(LinearTerm),
    /// `d | t` with `d >= 2`
    Div(Int, LinearTerm),
}

impl Atom {
    pub fn term(&self) -> &LinearTerm {
        match self {
            Atom::Le(t) | Atom::Eq(t) | Atom::Div(_, t) => t,
        }
    }

    fn map_term(&self, f: impl FnOnce(&LinearTerm) -> LinearTerm) -> Formula {
        match self {
            Atom::Le(t) => Formula::le_zero(f(t)),
            Atom::Eq(t) => Formula::eq_zero(f(t)),
            Atom::Div(d, t) => Formula::divides(d.clone(), f(t)),
        }
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<bool, Var>
    where
        F: Fn(&Var) -> Option<Int>,
    {
        let v = self.term().eval(lookup)?;
        Ok(match self {
            Atom::Le(_) => !v.is_positive(),
            Atom::Eq(_) => v.is_zero(),
            Atom::Div(d, _) => d.divides(&v),
        })
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn bool(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    /// `t <= 0`, normalized.
    pub fn le_zero(t: LinearTerm) -> Formula {
        if t.is_constant() {
            return Formula::bool(!t.constant_part().is_positive());
        }
        let g = t.content();
        if g.is_one() {
            return Formula::Atom(Atom::Le(t));
        }
        let h = LinearTerm::from_sorted(
            t.coeffs().iter().map(|(v, a)| (v.clone(), a.div_exact(&g))).collect(),
            Int::ZERO,
        );
        Formula::Atom(Atom::Le(h.add_constant(&t.constant_part().div_ceil(&g))))
    }

    /// `t = 0`, normalized so the leading coefficient is positive.
    pub fn eq_zero(t: LinearTerm) -> Formula {
        if t.is_constant() {
            return Formula::bool(t.constant_part().is_zero());
        }
        let mut g = t.content();
        if !g.divides(t.constant_part()) {
            return Formula::False;
        }
        if t.coeffs()[0].1.is_negative() {
            g = -g;
        }
        if g.is_one() {
            return Formula::Atom(Atom::Eq(t));
        }
        Formula::Atom(Atom::Eq(LinearTerm::from_sorted(
            t.coeffs().iter().map(|(v, a)| (v.clone(), a.div_exact(&g))).collect(),
            t.constant_part().div_exact(&g),
        )))
    }

    /// `d | t`. A zero divisor means `t = 0`; the sign of `d` is ignored.
    pub fn divides(d: impl Into<Int>, t: LinearTerm) -> Formula {
        let mut d = d.into().abs();
        if d.is_zero() {
            return Formula::eq_zero(t);
        }
        let mut t = reduce_mod(&t, &d);
        loop {
            if d.is_one() {
                return Formula::True;
            }
            if t.is_constant() {
                return Formula::bool(t.constant_part().is_zero());
            }
            let g = d.gcd(&t.content());
            if g.is_one() {
                return Formula::Atom(Atom::Div(d, t));
            }
            if !g.divides(t.constant_part()) {
                return Formula::False;
            }
            d = d.div_exact(&g);
            t = LinearTerm::from_parts(
                t.coeffs().iter().map(|(v, a)| (v.clone(), a.div_exact(&g))),
                t.constant_part().div_exact(&g),
            );
            t = reduce_mod(&t, &d);
        }
    }

    pub fn le(a: &LinearTerm, b: &LinearTerm) -> Formula {
        Formula::le_zero(a.sub(b))
    }

    pub fn lt(a: &LinearTerm, b: &LinearTerm) -> Formula {
        Formula::le_zero(a.sub(b).add_constant(&Int::ONE))
    }

    pub fn ge(a: &LinearTerm, b: &LinearTerm) -> Formula {
        Formula::le(b, a)
    }

    pub fn gt(a: &LinearTerm, b: &LinearTerm) -> Formula {
        Formula::lt(b, a)
    }

    pub fn eq(a: &LinearTerm, b: &LinearTerm) -> Formula {
        Formula::eq_zero(a.sub(b))
    }

    pub fn ne(a: &LinearTerm, b: &LinearTerm) -> Formula {
        Formula::not(Formula::eq(a, b))
    }

    /// `v = c` for a variable and a constant.
    pub fn var_eq(v: &Var, c: impl Into<Int>) -> Formula {
        Formula::eq(&LinearTerm::var(v.clone()), &LinearTerm::constant(c))
    }

    /// `a = b` for two variables.
    pub fn vars_eq(a: &Var, b: &Var) -> Formula {
        Formula::eq(&LinearTerm::var(a.clone()), &LinearTerm::var(b.clone()))
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn and2(a: Formula, b: Formula) -> Formula {
        Formula::and([a, b])
    }

    pub fn or2(a: Formula, b: Formula) -> Formula {
        Formula::or([a, b])
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (&a, &b) {
            (Formula::True, _) => b,
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (_, Formula::False) => Formula::not(a),
            _ => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        if !body.has_free(&v) {
            return body;
        }
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        if !body.has_free(&v) {
            return body;
        }
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists_many(vars: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vars: Vec<Var> = vars.into_iter().collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::exists(v, acc))
    }

    pub fn forall_many(vars: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vars: Vec<Var> = vars.into_iter().collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::forall(v, acc))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Number of nodes, counting each atom as one.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for v in a.term().vars() {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_free(&self, v: &Var) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Atom(a) => a.term().mentions(v),
            Formula::Not(f) => f.has_free(v),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.has_free(v)),
            Formula::Implies(a, b) => a.has_free(v) || b.has_free(v),
            Formula::Exists(w, f) | Formula::Forall(w, f) => w != v && f.has_free(v),
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.extend(a.term().vars().cloned()),
            Formula::Not(f) => f.collect_all(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_all(out)),
            Formula::Implies(a, b) => {
                a.collect_all(out);
                b.collect_all(out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                out.insert(v.clone());
                f.collect_all(out);
            }
        }
    }

    /// Capture-avoiding substitution of terms for free variables.
    ///
    /// A binder whose variable occurs in a replacement term is renamed to a
    /// fresh `name_N` first.
    pub fn substitute(&self, map: &BTreeMap<Var, LinearTerm>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        let mut taken: BTreeSet<Var> = self.all_vars();
        for (k, t) in map {
            taken.insert(k.clone());
            taken.extend(t.vars().cloned());
        }
        self.subst_rec(map, &mut taken)
    }

    fn subst_rec(&self, map: &BTreeMap<Var, LinearTerm>, taken: &mut BTreeSet<Var>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => a.map_term(|t| t.substitute(map)),
            Formula::Not(f) => Formula::not(f.subst_rec(map, taken)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.subst_rec(map, taken))),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.subst_rec(map, taken))),
            Formula::Implies(a, b) => {
                Formula::implies(a.subst_rec(map, taken), b.subst_rec(map, taken))
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let is_exists = matches!(self, Formula::Exists(..));
                let mut inner: BTreeMap<Var, LinearTerm> = map
                    .iter()
                    .filter(|(k, _)| *k != v && body.has_free(k))
                    .map(|(k, t)| (k.clone(), t.clone()))
                    .collect();
                if inner.is_empty() {
                    return self.clone();
                }
                let clash = inner.values().any(|t| t.mentions(v));
                let bv = if clash {
                    let fresh = fresh_var(v, taken);
                    taken.insert(fresh.clone());
                    inner.insert(v.clone(), LinearTerm::var(fresh.clone()));
                    fresh
                } else {
                    v.clone()
                };
                let b = body.subst_rec(&inner, taken);
                if is_exists {
                    Formula::exists(bv, b)
                } else {
                    Formula::forall(bv, b)
                }
            }
        }
    }

    pub fn substitute_var(&self, v: &Var, t: &LinearTerm) -> Formula {
        let mut m = BTreeMap::new();
        m.insert(v.clone(), t.clone());
        self.substitute(&m)
    }

    /// Renames free variables.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Formula {
        let m: BTreeMap<Var, LinearTerm> = map
            .iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.clone(), LinearTerm::var(b.clone())))
            .collect();
        self.substitute(&m)
    }

    /// Renames bound variables so that no binder shadows another binder or a
    /// free variable.
    pub fn standardize_apart(&self) -> Formula {
        let mut taken = self.free_vars();
        self.apart_rec(&mut taken)
    }

    fn apart_rec(&self, taken: &mut BTreeSet<Var>) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::Not(Box::new(f.apart_rec(taken))),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.apart_rec(taken)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.apart_rec(taken)).collect()),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.apart_rec(taken)), Box::new(b.apart_rec(taken)))
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let (nv, nb) = if taken.contains(v) {
                    let mut avoid = taken.clone();
                    avoid.extend(body.all_vars());
                    let fresh = fresh_var(v, &avoid);
                    let renamed = body.substitute_var(v, &LinearTerm::var(fresh.clone()));
                    (fresh, renamed)
                } else {
                    (v.clone(), (**body).clone())
                };
                taken.insert(nv.clone());
                let nb = Box::new(nb.apart_rec(taken));
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(nv, nb)
                } else {
                    Formula::Forall(nv, nb)
                }
            }
        }
    }

    /// Evaluates a quantifier-free formula. Quantified formulas go through
    /// the solver instead.
    pub fn eval_qf<F>(&self, lookup: &F) -> Result<bool, EvalError>
    where
        F: Fn(&Var) -> Option<Int>,
    {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => a.eval(lookup).map_err(EvalError::UnboundVariable)?,
            Formula::Not(f) => !f.eval_qf(lookup)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval_qf(lookup)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval_qf(lookup)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !a.eval_qf(lookup)? || b.eval_qf(lookup)?,
            Formula::Exists(..) | Formula::Forall(..) => return Err(EvalError::Quantified),
        })
    }

    /// Visits every atom.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.atoms_rec(&mut out);
        out
    }

    fn atoms_rec<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.atoms_rec(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.atoms_rec(out)),
            Formula::Implies(a, b) => {
                a.atoms_rec(out);
                b.atoms_rec(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    UnboundVariable(Var),
    Quantified,
}

fn reduce_mod(t: &LinearTerm, d: &Int) -> LinearTerm {
    LinearTerm::from_parts(
        t.coeffs().iter().map(|(v, a)| (v.clone(), a.mod_floor(d))),
        t.constant_part().mod_floor(d),
    )
}

/// First `base_N` not in `taken`, where `base` is `v` without primes.
pub fn fresh_var(v: &Var, taken: &BTreeSet<Var>) -> Var {
    let base = v.base();
    let stem = base.as_str().trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "v" } else { stem };
    let mut i = 0usize;
    loop {
        let cand = Var::new(&format!("{stem}_{i}"));
        if !taken.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

// Printing. Precedence levels: 0 implication, 1 disjunction, 2 conjunction,
// 3 unary and atoms.

fn write_atom(f: &mut fmt::Formatter<'_>, a: &Atom, negated: bool) -> fmt::Result {
    match a {
        Atom::Div(d, t) => {
            if negated {
                write!(f, "!({d} | {t})")
            } else {
                write!(f, "{d} | {t}")
            }
        }
        Atom::Le(t) | Atom::Eq(t) => {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (v, c) in t.coeffs() {
                if c.is_positive() {
                    pos.push((v.clone(), c.clone()));
                } else {
                    neg.push((v.clone(), -c));
                }
            }
            let k = -t.constant_part();
            let lhs = LinearTerm::from_sorted(pos, Int::ZERO);
            let rhs = LinearTerm::from_sorted(neg, Int::ZERO);
            let is_le = matches!(a, Atom::Le(_));
            if lhs.is_constant() {
                let op = match (is_le, negated) {
                    (true, false) => ">=",
                    (true, true) => "<",
                    (false, false) => "=",
                    (false, true) => "!=",
                };
                let k = -k;
                write!(f, "{rhs} {op} {k}")
            } else {
                let op = match (is_le, negated) {
                    (true, false) => "<=",
                    (true, true) => ">",
                    (false, false) => "=",
                    (false, true) => "!=",
                };
                write!(f, "{lhs} {op} {}", rhs.add_constant(&k))
            }
        }
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, phi: &Formula, ctx: u8) -> fmt::Result {
    let own = match phi {
        Formula::Implies(..) => 0,
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        _ => 3,
    };
    let paren = own < ctx;
    if paren {
        f.write_str("(")?;
    }
    match phi {
        Formula::True => f.write_str("true")?,
        Formula::False => f.write_str("false")?,
        Formula::Atom(a) => write_atom(f, a, false)?,
        Formula::Not(g) => match &**g {
            Formula::Atom(a) => write_atom(f, a, true)?,
            other => {
                f.write_str("!")?;
                write_prec(f, other, 4)?;
            }
        },
        Formula::And(fs) | Formula::Or(fs) => {
            let sep = if own == 2 { " && " } else { " || " };
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write_prec(f, g, own + 1)?;
            }
        }
        Formula::Implies(a, b) => {
            write_prec(f, a, 1)?;
            f.write_str(" => ")?;
            write_prec(f, b, 0)?;
        }
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let q = if matches!(phi, Formula::Exists(..)) { "exists" } else { "forall" };
            write!(f, "{q} {v}. (")?;
            write_prec(f, body, 0)?;
            f.write_str(")")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(f, self, 0)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Atom> for Formula {
    fn from(a: Atom) -> Formula {
        Formula::Atom(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn display_string(f: &Formula) -> String {
        format!("{f}")
    }

    fn x() -> LinearTerm {
        LinearTerm::var("x")
    }

    fn c(v: i64) -> LinearTerm {
        LinearTerm::constant(v)
    }

    #[test]
    fn atoms_normalize() {
        // 2x <= 3  ->  x <= 1
        let f = Formula::le(&x().scale(&Int::from(2)), &c(3));
        assert_eq!(f, Formula::le(&x(), &c(1)));
        // 2x = 3 has no solution
        assert_eq!(Formula::eq(&x().scale(&Int::from(2)), &c(3)), Formula::False);
        // 4 | 2x + 2  ->  2 | x + 1
        let d = Formula::divides(4, x().scale(&Int::from(2)).add_constant(&Int::from(2)));
        assert_eq!(d, Formula::divides(2, x().add_constant(&Int::ONE)));
        assert_eq!(Formula::divides(3, c(7)), Formula::False);
        assert_eq!(Formula::divides(1, x()), Formula::True);
    }

    #[test]
    fn printing() {
        let f = Formula::and([Formula::ge(&x(), &c(0)), Formula::lt(&x(), &c(5))]);
        assert_eq!(display_string(&f), "x >= 0 && x <= 4");
        let g = Formula::or([f.clone(), Formula::divides(2, x())]);
        assert_eq!(display_string(&g), "x >= 0 && x <= 4 || 2 | x");
        assert_eq!(display_string(&Formula::ne(&x(), &c(3))), "x != 3");
    }

    #[test]
    fn capture_avoidance() {
        let y = Var::new("y");
        let f = Formula::exists(Var::new("x"), Formula::eq(&x(), &LinearTerm::var(y.clone())));
        let g = f.substitute_var(&y, &x());
        assert_eq!(display_string(&g), "exists x_0. (x = x_0)");
        assert!(g.has_free(&Var::new("x")));
    }

    #[test]
    fn eval_quantifier_free() {
        let f = Formula::and([Formula::ge(&x(), &c(0)), Formula::lt(&x(), &c(100))]);
        let env = |v: &Var| (v.as_str() == "x").then(|| Int::from(0));
        assert_eq!(f.eval_qf(&env), Ok(true));
        let g = Formula::divides(2, x());
        let env7 = |_: &Var| Some(Int::from(7));
        assert_eq!(g.eval_qf(&env7), Ok(false));
        let none = |_: &Var| None;
        assert_eq!(g.eval_qf(&none), Err(EvalError::UnboundVariable(Var::new("x"))));
    }
}
