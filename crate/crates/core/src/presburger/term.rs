use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::int::Int;

/// Name of the control-state variable.
pub const CONTROL: &str = "q";

/// A variable name. Primed copies carry a trailing `'` per prime.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn control() -> Var {
        Var::new(CONTROL)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn primed(&self) -> Var {
        let mut s = String::from(self.as_str());
        s.push('\'');
        Var::new(&s)
    }

    pub fn double_primed(&self) -> Var {
        let mut s = String::from(self.as_str());
        s.push_str("''");
        Var::new(&s)
    }

    /// Number of trailing primes.
    pub fn primes(&self) -> usize {
        self.0.len() - self.0.trim_end_matches('\'').len()
    }

    /// The name with every prime stripped.
    pub fn base(&self) -> Var {
        Var::new(self.0.trim_end_matches('\''))
    }

    pub fn is_control(&self) -> bool {
        self.base().as_str() == CONTROL
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

/// `Σ aᵢ·vᵢ + c` with integer coefficients.
///
/// Coefficients are stored sorted by variable with no zero entries, so two
/// equal terms are structurally equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearTerm {
    coeffs: Vec<(Var, Int)>,
    constant: Int,
}

impl LinearTerm {
    pub fn zero() -> LinearTerm {
        LinearTerm::default()
    }

    pub fn constant(c: impl Into<Int>) -> LinearTerm {
        LinearTerm {
            coeffs: Vec::new(),
            constant: c.into(),
        }
    }

    pub fn var(v: impl Into<Var>) -> LinearTerm {
        LinearTerm {
            coeffs: alloc::vec![(v.into(), Int::ONE)],
            constant: Int::ZERO,
        }
    }

    pub fn scaled_var(v: impl Into<Var>, a: impl Into<Int>) -> LinearTerm {
        LinearTerm::from_parts([(v.into(), a.into())], Int::ZERO)
    }

    pub fn from_parts(coeffs: impl IntoIterator<Item = (Var, Int)>, constant: Int) -> LinearTerm {
        let mut map: BTreeMap<Var, Int> = BTreeMap::new();
        for (v, a) in coeffs {
            let e = map.entry(v).or_insert(Int::ZERO);
            *e = &*e + &a;
        }
        LinearTerm {
            coeffs: map.into_iter().filter(|(_, a)| !a.is_zero()).collect(),
            constant,
        }
    }

    /// Builds from an already sorted, zero-free coefficient list.
    pub(crate) fn from_sorted(coeffs: Vec<(Var, Int)>, constant: Int) -> LinearTerm {
        debug_assert!(coeffs.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(coeffs.iter().all(|(_, a)| !a.is_zero()));
        LinearTerm { coeffs, constant }
    }

    pub fn constant_part(&self) -> &Int {
        &self.constant
    }

    pub fn coeffs(&self) -> &[(Var, Int)] {
        &self.coeffs
    }

    pub fn coeff(&self, v: &Var) -> Int {
        match self.coeffs.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => self.coeffs[i].1.clone(),
            Err(_) => Int::ZERO,
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.binary_search_by(|(w, _)| w.cmp(v)).is_ok()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.iter().map(|(v, _)| v)
    }

    pub fn add(&self, other: &LinearTerm) -> LinearTerm {
        self.add_scaled(other, &Int::ONE)
    }

    pub fn sub(&self, other: &LinearTerm) -> LinearTerm {
        self.add_scaled(other, &Int::from(-1))
    }

    /// `self + k·other`, merging the sorted coefficient lists.
    pub fn add_scaled(&self, other: &LinearTerm, k: &Int) -> LinearTerm {
        if k.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() + other.coeffs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.coeffs.len() || j < other.coeffs.len() {
            let take_left = j >= other.coeffs.len()
                || (i < self.coeffs.len() && self.coeffs[i].0 < other.coeffs[j].0);
            let take_right = i >= self.coeffs.len()
                || (j < other.coeffs.len() && other.coeffs[j].0 < self.coeffs[i].0);
            if take_left {
                out.push(self.coeffs[i].clone());
                i += 1;
            } else if take_right {
                out.push((other.coeffs[j].0.clone(), &other.coeffs[j].1 * k));
                j += 1;
            } else {
                let a = &self.coeffs[i].1 + &(&other.coeffs[j].1 * k);
                if !a.is_zero() {
                    out.push((self.coeffs[i].0.clone(), a));
                }
                i += 1;
                j += 1;
            }
        }
        LinearTerm {
            coeffs: out,
            constant: &self.constant + &(&other.constant * k),
        }
    }

    pub fn add_constant(&self, c: &Int) -> LinearTerm {
        LinearTerm {
            coeffs: self.coeffs.clone(),
            constant: &self.constant + c,
        }
    }

    pub fn scale(&self, k: &Int) -> LinearTerm {
        if k.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(v, a)| (v.clone(), a * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn negate(&self) -> LinearTerm {
        self.scale(&Int::from(-1))
    }

    /// Drops the constant.
    pub fn homogeneous(&self) -> LinearTerm {
        LinearTerm {
            coeffs: self.coeffs.clone(),
            constant: Int::ZERO,
        }
    }

    /// Removes `v`, returning its coefficient and the remainder.
    pub fn split(&self, v: &Var) -> (Int, LinearTerm) {
        match self.coeffs.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => {
                let mut rest = self.clone();
                let (_, a) = rest.coeffs.remove(i);
                (a, rest)
            }
            Err(_) => (Int::ZERO, self.clone()),
        }
    }

    /// Replaces variables by terms.
    pub fn substitute(&self, map: &BTreeMap<Var, LinearTerm>) -> LinearTerm {
        if !self.coeffs.iter().any(|(v, _)| map.contains_key(v)) {
            return self.clone();
        }
        let mut out = LinearTerm::constant(self.constant.clone());
        let mut kept = Vec::new();
        for (v, a) in &self.coeffs {
            match map.get(v) {
                Some(t) => out = out.add_scaled(t, a),
                None => kept.push((v.clone(), a.clone())),
            }
        }
        out.add(&LinearTerm::from_sorted(kept, Int::ZERO))
    }

    pub fn substitute_var(&self, v: &Var, t: &LinearTerm) -> LinearTerm {
        let (a, rest) = self.split(v);
        if a.is_zero() {
            return self.clone();
        }
        rest.add_scaled(t, &a)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinearTerm {
        if !self.coeffs.iter().any(|(v, _)| map.contains_key(v)) {
            return self.clone();
        }
        LinearTerm::from_parts(
            self.coeffs
                .iter()
                .map(|(v, a)| (map.get(v).cloned().unwrap_or_else(|| v.clone()), a.clone())),
            self.constant.clone(),
        )
    }

    /// Evaluates with `lookup`, returning the first unbound variable on failure.
    pub fn eval<F>(&self, lookup: &F) -> Result<Int, Var>
    where
        F: Fn(&Var) -> Option<Int>,
    {
        let mut acc = self.constant.clone();
        for (v, a) in &self.coeffs {
            let x = lookup(v).ok_or_else(|| v.clone())?;
            acc = &acc + &(a * &x);
        }
        Ok(acc)
    }

    /// gcd of the variable coefficients (0 for a constant term).
    pub fn content(&self) -> Int {
        let mut g = Int::ZERO;
        for (_, a) in &self.coeffs {
            g = g.gcd(a);
            if g.is_one() {
                break;
            }
        }
        g
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, a) in &self.coeffs {
            let neg = a.is_negative();
            let mag = a.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if !self.constant.is_zero() {
            if self.constant.is_negative() {
                write!(f, " - {}", self.constant.abs())?;
            } else {
                write!(f, " + {}", self.constant)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
