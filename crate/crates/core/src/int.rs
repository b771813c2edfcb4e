//! Arbitrary-precision integers with an inline fast path.
//!
//! Almost every coefficient that shows up while eliminating quantifiers fits
//! in a machine word, so values are kept as `i64` until an operation
//! overflows, and only then promoted to a heap-allocated [`BigInt`].

use alloc::boxed::Box;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone)]
pub enum Int {
    Small(i64),
    Big(Box<BigInt>),
}

impl Int {
    pub const ZERO: Int = Int::Small(0);
    pub const ONE: Int = Int::Small(1);

    fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(Box::new(b)),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => (**b).clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => Some(*v),
            Int::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Int::Small(1))
    }

    pub fn signum(&self) -> i32 {
        match self {
            Int::Small(v) => v.signum() as i32,
            Int::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Int {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Floor division. Panics on a zero divisor.
    pub fn div_floor(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if !(*a == i64::MIN && *b == -1) {
                return Int::Small(Integer::div_floor(a, b));
            }
        }
        Int::from_big(Integer::div_floor(&self.to_big(), &other.to_big()))
    }

    pub fn div_ceil(&self, other: &Int) -> Int {
        -((-self).div_floor(other))
    }

    /// Remainder with the sign of the divisor (always in `[0, m)` for `m > 0`).
    pub fn mod_floor(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if *b != -1 {
                return Int::Small(Integer::mod_floor(a, b));
            }
            return Int::ZERO;
        }
        Int::from_big(Integer::mod_floor(&self.to_big(), &other.to_big()))
    }

    /// Exact division; the caller guarantees divisibility.
    pub fn div_exact(&self, other: &Int) -> Int {
        debug_assert!(self.mod_floor(other).is_zero());
        self.div_floor(other)
    }

    pub fn divides(&self, other: &Int) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.mod_floor(&self.abs()).is_zero()
    }

    pub fn gcd(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            let (mut x, mut y) = (a.unsigned_abs(), b.unsigned_abs());
            while y != 0 {
                let t = x % y;
                x = y;
                y = t;
            }
            if let Ok(v) = i64::try_from(x) {
                return Int::Small(v);
            }
        }
        Int::from_big(self.to_big().gcd(&other.to_big()))
    }

    pub fn lcm(&self, other: &Int) -> Int {
        if self.is_zero() || other.is_zero() {
            return Int::ZERO;
        }
        let g = self.gcd(other);
        (self.abs().div_exact(&g)) * other.abs()
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Small(v)
    }
}

impl From<i32> for Int {
    fn from(v: i32) -> Self {
        Int::Small(v as i64)
    }
}

impl From<u32> for Int {
    fn from(v: u32) -> Self {
        Int::Small(v as i64)
    }
}

impl From<usize> for Int {
    fn from(v: usize) -> Self {
        match i64::try_from(v) {
            Ok(x) => Int::Small(x),
            Err(_) => Int::from_big(BigInt::from(v)),
        }
    }
}

impl From<BigInt> for Int {
    fn from(b: BigInt) -> Self {
        Int::from_big(b)
    }
}

impl Default for Int {
    fn default() -> Self {
        Int::ZERO
    }
}

impl PartialEq for Int {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a == b,
            (Int::Big(a), Int::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Int {}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl core::hash::Hash for Int {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        match self {
            Int::Small(v) => v.hash(state),
            Int::Big(b) => b.hash(state),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a, 'b> $tr<&'b Int> for &'a Int {
            type Output = Int;
            fn $m(self, rhs: &'b Int) -> Int {
                if let (Int::Small(a), Int::Small(b)) = (self, rhs) {
                    if let Some(v) = a.$checked(*b) {
                        return Int::Small(v);
                    }
                }
                Int::from_big($tr::$m(self.to_big(), rhs.to_big()))
            }
        }
        impl $tr<Int> for Int {
            type Output = Int;
            fn $m(self, rhs: Int) -> Int {
                $tr::$m(&self, &rhs)
            }
        }
        impl<'b> $tr<&'b Int> for Int {
            type Output = Int;
            fn $m(self, rhs: &'b Int) -> Int {
                $tr::$m(&self, rhs)
            }
        }
        impl<'a> $tr<Int> for &'a Int {
            type Output = Int;
            fn $m(self, rhs: Int) -> Int {
                $tr::$m(self, &rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &Int {
    type Output = Int;
    fn neg(self) -> Int {
        match self {
            Int::Small(v) => match v.checked_neg() {
                Some(n) => Int::Small(n),
                None => Int::from_big(-BigInt::from(*v)),
            },
            Int::Big(b) => Int::from_big(-(**b).clone()),
        }
    }
}

impl Neg for Int {
    type Output = Int;
    fn neg(self) -> Int {
        -&self
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Zero for Int {
    fn zero() -> Self {
        Int::ZERO
    }
    fn is_zero(&self) -> bool {
        Int::is_zero(self)
    }
}

impl One for Int {
    fn one() -> Self {
        Int::ONE
    }
}

impl core::str::FromStr for Int {
    type Err = num_bigint::ParseBigIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<i64>() {
            return Ok(Int::Small(v));
        }
        s.parse::<BigInt>().map(Int::from_big)
    }
}
