use alloc::boxed::Box;
use core::fmt;

use crate::presburger::Formula;

/// CTL in existential normal form. Leaves are state formulas.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum CtlFormula {
    Prop(Formula),
    Not(Box<CtlFormula>),
    Or(Box<CtlFormula>, Box<CtlFormula>),
    EX(Box<CtlFormula>),
    EU(Box<CtlFormula>, Box<CtlFormula>),
    EG(Box<CtlFormula>),
}

/// Surface CTL including universal operators and derived connectives.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Ctl {
    Prop(Formula),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    Implies(Box<Ctl>, Box<Ctl>),
    EX(Box<Ctl>),
    EF(Box<Ctl>),
    EG(Box<Ctl>),
    EU(Box<Ctl>, Box<Ctl>),
    AX(Box<Ctl>),
    AF(Box<Ctl>),
    AG(Box<Ctl>),
    AU(Box<Ctl>, Box<Ctl>),
}

impl CtlFormula {
    pub fn prop(f: Formula) -> CtlFormula {
        CtlFormula::Prop(f)
    }

    /// Negation that folds into propositions and cancels double negation.
    pub fn not(a: CtlFormula) -> CtlFormula {
        match a {
            CtlFormula::Prop(f) => CtlFormula::Prop(Formula::not(f)),
            CtlFormula::Not(b) => *b,
            a => CtlFormula::Not(Box::new(a)),
        }
    }

    pub fn or(a: CtlFormula, b: CtlFormula) -> CtlFormula {
        match (a, b) {
            (CtlFormula::Prop(f), CtlFormula::Prop(g)) => CtlFormula::Prop(Formula::or2(f, g)),
            (a, b) => CtlFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn and(a: CtlFormula, b: CtlFormula) -> CtlFormula {
        match (a, b) {
            (CtlFormula::Prop(f), CtlFormula::Prop(g)) => CtlFormula::Prop(Formula::and2(f, g)),
            (a, b) => CtlFormula::not(CtlFormula::or(CtlFormula::not(a), CtlFormula::not(b))),
        }
    }

    pub fn ex(a: CtlFormula) -> CtlFormula {
        CtlFormula::EX(Box::new(a))
    }

    pub fn eu(a: CtlFormula, b: CtlFormula) -> CtlFormula {
        CtlFormula::EU(Box::new(a), Box::new(b))
    }

    pub fn eg(a: CtlFormula) -> CtlFormula {
        CtlFormula::EG(Box::new(a))
    }

    /// Number of nodes, counting each proposition as one.
    pub fn size(&self) -> usize {
        match self {
            CtlFormula::Prop(_) => 1,
            CtlFormula::Not(a) | CtlFormula::EX(a) | CtlFormula::EG(a) => 1 + a.size(),
            CtlFormula::Or(a, b) | CtlFormula::EU(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Nesting depth of temporal operators.
    pub fn temporal_depth(&self) -> usize {
        match self {
            CtlFormula::Prop(_) => 0,
            CtlFormula::Not(a) => a.temporal_depth(),
            CtlFormula::Or(a, b) => a.temporal_depth().max(b.temporal_depth()),
            CtlFormula::EX(a) | CtlFormula::EG(a) => 1 + a.temporal_depth(),
            CtlFormula::EU(a, b) => 1 + a.temporal_depth().max(b.temporal_depth()),
        }
    }
}

impl Ctl {
    /// Rewrites into existential normal form:
    ///
    /// | surface      | ENF                              |
    /// |--------------|----------------------------------|
    /// | `a && b`     | `!(!a \|\| !b)`                  |
    /// | `a -> b`     | `!a \|\| b`                      |
    /// | `EF a`       | `E[true U a]`                    |
    /// | `AX a`       | `!EX !a`                         |
    /// | `AF a`       | `!EG !a`                         |
    /// | `AG a`       | `!E[true U !a]`                  |
    /// | `A[a U b]`   | `!E[!b U (!a && !b)] && !EG !b`  |
    ///
    /// Boolean combinations of propositions are folded into a single
    /// proposition.
    pub fn to_enf(&self) -> CtlFormula {
        use CtlFormula as E;
        match self {
            Ctl::Prop(f) => E::Prop(f.clone()),
            Ctl::Not(a) => E::not(a.to_enf()),
            Ctl::And(a, b) => E::and(a.to_enf(), b.to_enf()),
            Ctl::Or(a, b) => E::or(a.to_enf(), b.to_enf()),
            Ctl::Implies(a, b) => E::or(E::not(a.to_enf()), b.to_enf()),
            Ctl::EX(a) => E::ex(a.to_enf()),
            Ctl::EF(a) => E::eu(E::Prop(Formula::True), a.to_enf()),
            Ctl::EG(a) => E::eg(a.to_enf()),
            Ctl::EU(a, b) => E::eu(a.to_enf(), b.to_enf()),
            Ctl::AX(a) => E::not(E::ex(E::not(a.to_enf()))),
            Ctl::AF(a) => E::not(E::eg(E::not(a.to_enf()))),
            Ctl::AG(a) => E::not(E::eu(E::Prop(Formula::True), E::not(a.to_enf()))),
            Ctl::AU(a, b) => {
                let na = E::not(a.to_enf());
                let nb = E::not(b.to_enf());
                E::and(
                    E::not(E::eu(nb.clone(), E::and(na, nb.clone()))),
                    E::not(E::eg(nb)),
                )
            }
        }
    }
}

fn write_ctl(f: &mut fmt::Formatter<'_>, c: &CtlFormula) -> fmt::Result {
    match c {
        CtlFormula::Prop(p) => write!(f, "({p})"),
        CtlFormula::Not(a) => {
            f.write_str("!")?;
            write_ctl(f, a)
        }
        CtlFormula::Or(a, b) => {
            f.write_str("(")?;
            write_ctl(f, a)?;
            f.write_str(" || ")?;
            write_ctl(f, b)?;
            f.write_str(")")
        }
        CtlFormula::EX(a) => {
            f.write_str("EX ")?;
            write_ctl(f, a)
        }
        CtlFormula::EG(a) => {
            f.write_str("EG ")?;
            write_ctl(f, a)
        }
        CtlFormula::EU(a, b) => {
            f.write_str("E [")?;
            write_ctl(f, a)?;
            f.write_str(" U ")?;
            write_ctl(f, b)?;
            f.write_str("]")
        }
    }
}

impl fmt::Display for CtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ctl(f, self)
    }
}

impl fmt::Debug for CtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ctl(f, self)
    }
}
