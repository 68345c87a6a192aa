use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{is_perfect_square, QSqrt2, Rational};
use crate::error::{Error, Result};

/// Three-valued rationality tag.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Tag {
    Rational,
    Irrational,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RealValue {
    Exact(QSqrt2),
    /// Diagnostic approximation only; never used in a certificate path.
    Approx(f64),
}

/// A real number carrying a sound rationality tag.
///
/// Exact values always carry the decided tag (`Rational` iff the `sqrt2`
/// coefficient vanishes). Approximate values carry `Unknown` unless a
/// decided tag was justified by the transcendence table, in which case
/// `transcendental` records that justification.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedReal {
    value: RealValue,
    tag: Tag,
    transcendental: bool,
}

impl TaggedReal {
    pub fn exact(v: QSqrt2) -> Self {
        let tag = if v.is_rational() { Tag::Rational } else { Tag::Irrational };
        TaggedReal { value: RealValue::Exact(v), tag, transcendental: false }
    }

    pub fn rational(r: Rational) -> Self {
        Self::exact(QSqrt2::from_rational(r))
    }

    pub fn approx(v: f64) -> Self {
        TaggedReal { value: RealValue::Approx(v), tag: Tag::Unknown, transcendental: false }
    }

    /// An approximate value certified transcendental (hence irrational).
    pub fn transcendental(v: f64) -> Self {
        TaggedReal { value: RealValue::Approx(v), tag: Tag::Irrational, transcendental: true }
    }

    /// Approximate value with an externally decided irrational tag.
    pub(crate) fn approx_irrational(v: f64) -> Self {
        TaggedReal { value: RealValue::Approx(v), tag: Tag::Irrational, transcendental: false }
    }

    pub fn value(&self) -> &RealValue {
        &self.value
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn is_transcendental(&self) -> bool {
        self.transcendental
    }

    pub fn as_exact(&self) -> Option<&QSqrt2> {
        match &self.value {
            RealValue::Exact(v) => Some(v),
            RealValue::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.value {
            RealValue::Exact(v) => v.to_f64(),
            RealValue::Approx(f) => *f,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.as_exact().is_some_and(QSqrt2::is_zero)
    }

    pub fn neg(&self) -> Self {
        match &self.value {
            RealValue::Exact(v) => Self::exact(-v),
            RealValue::Approx(f) => TaggedReal { value: RealValue::Approx(-f), ..self.clone() },
        }
    }
}

impl fmt::Display for TaggedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            RealValue::Exact(v) => write!(f, "{v}"),
            RealValue::Approx(x) => write!(f, "~{x:e} [{:?}]", self.tag),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TagOp {
    Add,
    Sub,
    Mul,
}

/// Combines two tagged reals, keeping the tag sound: a decided tag is only
/// produced when it follows from the operands' tags or from exact arithmetic.
pub fn tag_propagate(op: TagOp, x: &TaggedReal, y: &TaggedReal) -> TaggedReal {
    if let (Some(a), Some(b)) = (x.as_exact(), y.as_exact()) {
        return TaggedReal::exact(match op {
            TagOp::Add => a + b,
            TagOp::Sub => a - b,
            TagOp::Mul => a * b,
        });
    }
    let fx = x.to_f64();
    let fy = y.to_f64();
    match op {
        TagOp::Add | TagOp::Sub => {
            let v = if op == TagOp::Add { fx + fy } else { fx - fy };
            // algebraic + transcendental is transcendental
            let trans = (x.transcendental && y.as_exact().is_some())
                || (y.transcendental && x.as_exact().is_some());
            if trans {
                return TaggedReal::transcendental(v);
            }
            match (x.tag, y.tag) {
                (Tag::Rational, Tag::Irrational) | (Tag::Irrational, Tag::Rational) => {
                    TaggedReal::approx_irrational(v)
                }
                _ => TaggedReal::approx(v),
            }
        }
        TagOp::Mul => {
            if x.is_exact_zero() || y.is_exact_zero() {
                return TaggedReal::rational(Rational::zero());
            }
            let v = fx * fy;
            let trans = (x.transcendental && y.as_exact().is_some())
                || (y.transcendental && x.as_exact().is_some());
            if trans {
                return TaggedReal::transcendental(v);
            }
            match (x.tag, y.tag) {
                (Tag::Rational, Tag::Irrational) | (Tag::Irrational, Tag::Rational) => {
                    TaggedReal::approx_irrational(v)
                }
                _ => TaggedReal::approx(v),
            }
        }
    }
}

/// Square root with a decided tag whenever the input is an exact rational.
pub fn sqrt_tagged(x: &TaggedReal) -> Result<TaggedReal> {
    if x.to_f64() < 0.0 || x.as_exact().is_some_and(QSqrt2::is_negative) {
        return Err(Error::Domain(format!("square root of negative value {x}")));
    }
    let Some(r) = x.as_exact().and_then(QSqrt2::as_rational) else {
        return Ok(TaggedReal::approx(x.to_f64().sqrt()));
    };
    let (p, q) = (r.numer(), r.denom());
    if let (Some(sp), Some(sq)) = (is_perfect_square(p), is_perfect_square(q)) {
        return Ok(TaggedReal::rational(Rational::new(sp, sq)));
    }
    // sqrt(p/q) = sqrt(p q)/q; exact in Q(sqrt2) when p q = 2 m^2
    let pq: BigInt = p * q;
    if !pq.is_negative() && (&pq % 2u32).is_zero() {
        if let Some(m) = is_perfect_square(&(&pq / 2u32)) {
            return Ok(TaggedReal::exact(QSqrt2::new(Rational::zero(), Rational::new(m, q.clone()))));
        }
    }
    Ok(TaggedReal::approx_irrational(x.to_f64().sqrt()))
}
