use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use super::{fmt_rational, parse_rational, rational_to_f64, Rational};
use crate::error::{Error, Result};

/// An element `a + b*sqrt2` of the quadratic field `Q(sqrt 2)`.
///
/// The pair `(a, b)` is unique per value since `sqrt 2` is irrational, so
/// derived equality and hashing are exact.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct QSqrt2 {
    a: Rational,
    b: Rational,
}

impl QSqrt2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        QSqrt2 { a, b }
    }

    pub fn from_rational(a: Rational) -> Self {
        QSqrt2 { a, b: Rational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(super::int(n))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn sqrt2() -> Self {
        QSqrt2 { a: Rational::zero(), b: Rational::one() }
    }

    /// `1/sqrt 2 = sqrt2 / 2`.
    pub fn inv_sqrt2() -> Self {
        QSqrt2 { a: Rational::zero(), b: super::rat(1, 2) }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn conj(&self) -> Self {
        QSqrt2 { a: self.a.clone(), b: -&self.b }
    }

    /// Field norm `a^2 - 2 b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - Rational::from_integer(2.into()) * &self.b * &self.b
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("inversion of zero".into()));
        }
        let n = self.norm();
        Ok(QSqrt2 { a: &self.a / &n, b: -&self.b / &n })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        match (sa, sb) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (x, y) if x == y => x,
            (sa, sb) => {
                let a2 = &self.a * &self.a;
                let b2 = Rational::from_integer(2.into()) * &self.b * &self.b;
                if a2 > b2 {
                    sa
                } else {
                    sb
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * std::f64::consts::SQRT_2
    }

    /// Rational enclosure `[lo, hi]` using a `sqrt 2` enclosure of width `2^-bits`.
    pub fn enclosure(&self, bits: u32) -> (Rational, Rational) {
        let (s_lo, s_hi) = super::sqrt2_enclosure(bits);
        let (x, y) = (&self.b * &s_lo, &self.b * &s_hi);
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        (&self.a + lo, &self.a + hi)
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for QSqrt2 {
    fn from(r: Rational) -> Self {
        QSqrt2::from_rational(r)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, |$l:ident, $r:ident| $body:expr) => {
        impl $tr<&QSqrt2> for &QSqrt2 {
            type Output = QSqrt2;
            fn $m(self, rhs: &QSqrt2) -> QSqrt2 {
                let ($l, $r) = (self, rhs);
                $body
            }
        }
        impl $tr<QSqrt2> for QSqrt2 {
            type Output = QSqrt2;
            fn $m(self, rhs: QSqrt2) -> QSqrt2 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&QSqrt2> for QSqrt2 {
            type Output = QSqrt2;
            fn $m(self, rhs: &QSqrt2) -> QSqrt2 {
                (&self).$m(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |l, r| QSqrt2 { a: &l.a + &r.a, b: &l.b + &r.b });
forward_binop!(Sub, sub, |l, r| QSqrt2 { a: &l.a - &r.a, b: &l.b - &r.b });
forward_binop!(Mul, mul, |l, r| QSqrt2 {
    a: &l.a * &r.a + Rational::from_integer(2.into()) * &l.b * &r.b,
    b: &l.a * &r.b + &l.b * &r.a,
});

impl Neg for &QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { a: -&self.a, b: -&self.b }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        -&self
    }
}

/// Canonical text: `a`, `b*sqrt2`, `a+b*sqrt2` or `a-b*sqrt2`, with rationals as `p/q`.
impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&fmt_rational(&self.a));
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt2", fmt_rational(&self.b));
        }
        if self.b.is_negative() {
            write!(f, "{}-{}*sqrt2", fmt_rational(&self.a), fmt_rational(&-&self.b))
        } else {
            write!(f, "{}+{}*sqrt2", fmt_rational(&self.a), fmt_rational(&self.b))
        }
    }
}

impl FromStr for QSqrt2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(body) = s.strip_suffix("*sqrt2") else {
            return Ok(QSqrt2::from_rational(parse_rational(s)?));
        };
        let split = body
            .char_indices()
            .skip(1)
            .find(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i);
        match split {
            None => Ok(QSqrt2::new(Rational::zero(), parse_rational(body)?)),
            Some(i) => {
                let a = parse_rational(&body[..i])?;
                let rest = &body[i..];
                let b = parse_rational(rest.strip_prefix('+').unwrap_or(rest))?;
                Ok(QSqrt2::new(a, b))
            }
        }
    }
}
