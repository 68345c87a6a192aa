//! Exact arithmetic over the rationals and the quadratic field `Q(sqrt 2)`,
//! plus rationality-tagged reals on which the indicator of irrationals can be
//! evaluated soundly.

mod qsqrt2;
mod tagged;
mod transcend;

pub use qsqrt2::QSqrt2;
pub use tagged::{sqrt_tagged, tag_propagate, RealValue, Tag, TagOp, TaggedReal};
pub use transcend::{transcendence_axiom_lookup, Lookup, TranscendentalForm, TRANSCENDENCE_TABLE};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q` or `p` (optionally signed) into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("malformed rational `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    if num.is_empty() || den.is_empty() || den.starts_with(['-', '+']) {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Domain(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(num, den))
}

/// Prints a rational as `p/q`, or `p` when the denominator is one.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Rational enclosure `[lo, hi]` of `sqrt 2` with width at most `2^-bits`.
pub fn sqrt2_enclosure(bits: u32) -> (Rational, Rational) {
    let scale = BigInt::from(1) << bits;
    let lo = (BigInt::from(2) * &scale * &scale).sqrt();
    let hi = &lo + 1;
    (
        Rational::new(lo, scale.clone()),
        Rational::new(hi, scale),
    )
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_abs(r: &Rational) -> Rational {
    r.abs()
}

/// Simplest rational (least denominator, then least numerator) strictly
/// inside the open interval `(lo, hi)`; requires `lo < hi`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo < hi, "empty interval");
    if lo.is_negative() && hi.is_positive() {
        return Rational::zero();
    }
    if !lo.is_negative() {
        simplest_nonneg(lo, hi)
    } else {
        -simplest_nonneg(&-hi, &-lo)
    }
}

// Stern-Brocot descent via continued fractions on 0 <= lo < hi.
fn simplest_nonneg(lo: &Rational, hi: &Rational) -> Rational {
    let fl = lo.floor();
    let candidate = &fl + Rational::from_integer(BigInt::from(1));
    if &candidate < hi {
        // an integer lies strictly inside, unless lo itself is that integer
        if lo.is_integer() && lo < hi {
            let next = lo + Rational::from_integer(BigInt::from(1));
            if &next < hi {
                return next;
            }
        } else {
            return candidate;
        }
    }
    // lo and hi share the integer part (or lo is an integer and hi <= lo + 1)
    let base = fl.clone();
    let lo_frac = lo - &base;
    let hi_frac = hi - &base;
    if lo_frac.is_zero() {
        // interval (0, hi_frac) with hi_frac <= 1: simplest is 1/k for the least k with 1/k < hi_frac
        let k = (hi_frac.recip()).floor() + Rational::from_integer(BigInt::from(1));
        return base + k.recip();
    }
    // recurse on reciprocals: (1/hi_frac, 1/lo_frac)
    let inner = simplest_nonneg(&hi_frac.recip(), &lo_frac.recip());
    base + inner.recip()
}
