use std::sync::Arc;

use super::{w_exact, w_slope, Expr, Func};
use crate::error::{Error, Result};
use crate::numbers::{
    sqrt_tagged, tag_propagate, transcendence_axiom_lookup, QSqrt2, Tag, TagOp, TaggedReal,
    TranscendentalForm,
};

/// Evaluates `barGamma`, i.e. the extension of `w o f` for a constructed
/// matching map `f`.
pub trait BarGammaOracle: Send + Sync + std::fmt::Debug {
    fn eval_bar_gamma(&self, arg: &TaggedReal) -> Result<TaggedReal>;
}

#[derive(Clone, Debug, Default)]
pub struct EvalContext {
    pub bar_gamma: Option<Arc<dyn BarGammaOracle>>,
}

impl EvalContext {
    pub fn with_bar_gamma(oracle: Arc<dyn BarGammaOracle>) -> Self {
        EvalContext { bar_gamma: Some(oracle) }
    }
}

const MAX_CANDIDATES: usize = 16;

/// Result of tagged evaluation: a single value, or a small set of candidates
/// when an indicator was applied to an argument of unknown rationality.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated {
    candidates: Vec<TaggedReal>,
}

impl Evaluated {
    pub fn single(v: TaggedReal) -> Self {
        Evaluated { candidates: vec![v] }
    }

    fn from_candidates(mut cs: Vec<TaggedReal>) -> Result<Self> {
        let mut out: Vec<TaggedReal> = Vec::new();
        for c in cs.drain(..) {
            let dup = c.as_exact().is_some() && out.iter().any(|o| o.as_exact() == c.as_exact());
            if !dup {
                out.push(c);
            }
        }
        if out.len() > MAX_CANDIDATES {
            return Err(Error::Invalid("indeterminate evaluation has too many candidates".into()));
        }
        Ok(Evaluated { candidates: out })
    }

    pub fn candidates(&self) -> &[TaggedReal] {
        &self.candidates
    }

    pub fn is_determinate(&self) -> bool {
        self.candidates.len() == 1
    }

    pub fn value(&self) -> Option<&TaggedReal> {
        self.is_determinate().then(|| &self.candidates[0])
    }

    /// The exact value, when determinate and exact.
    pub fn exact(&self) -> Option<&QSqrt2> {
        self.value().and_then(TaggedReal::as_exact)
    }

    fn map(&self, f: impl Fn(&TaggedReal) -> Result<Vec<TaggedReal>>) -> Result<Self> {
        let mut out = Vec::new();
        for c in &self.candidates {
            out.extend(f(c)?);
        }
        Self::from_candidates(out)
    }

    fn zip(&self, other: &Self, op: TagOp) -> Result<Self> {
        let mut out = Vec::new();
        for a in &self.candidates {
            for b in &other.candidates {
                out.push(tag_propagate(op, a, b));
            }
        }
        Self::from_candidates(out)
    }
}

/// Evaluates at a point given as one tagged real per variable.
pub fn eval_tagged(e: &Expr, point: &[TaggedReal], ctx: &EvalContext) -> Result<Evaluated> {
    match e {
        Expr::Const(c) => Ok(Evaluated::single(TaggedReal::exact(c.clone()))),
        Expr::Var(i) => point
            .get(*i)
            .cloned()
            .map(Evaluated::single)
            .ok_or_else(|| Error::Domain(format!("variable x_{i} not supplied"))),
        Expr::Add(a, b) => eval_tagged(a, point, ctx)?.zip(&eval_tagged(b, point, ctx)?, TagOp::Add),
        Expr::Sub(a, b) => eval_tagged(a, point, ctx)?.zip(&eval_tagged(b, point, ctx)?, TagOp::Sub),
        Expr::Mul(a, b) => eval_tagged(a, point, ctx)?.zip(&eval_tagged(b, point, ctx)?, TagOp::Mul),
        Expr::Neg(a) => eval_tagged(a, point, ctx)?.map(|v| Ok(vec![v.neg()])),
        Expr::Pow(a, k) => eval_tagged(a, point, ctx)?.map(|v| Ok(vec![pow_tagged(v, *k)])),
        Expr::Call(f, a) => {
            let arg = eval_tagged(a, point, ctx)?;
            arg.map(|v| apply(f, v, ctx))
        }
    }
}

/// Convenience: evaluates a one-variable expression at an exact point.
pub fn eval_at(e: &Expr, x: &QSqrt2, ctx: &EvalContext) -> Result<Evaluated> {
    eval_tagged(e, &[TaggedReal::exact(x.clone())], ctx)
}

fn pow_tagged(v: &TaggedReal, k: u32) -> TaggedReal {
    match v.as_exact() {
        Some(x) => TaggedReal::exact(x.pow(k)),
        None if v.is_transcendental() => TaggedReal::transcendental(v.to_f64().powi(k as i32)),
        None => TaggedReal::approx(v.to_f64().powi(k as i32)),
    }
}

/// Sign of a tagged value when it can be decided.
fn sign(v: &TaggedReal) -> Option<std::cmp::Ordering> {
    match v.as_exact() {
        Some(x) => Some(x.signum()),
        // approximations are only trusted well away from zero
        None if v.to_f64().abs() > 1e-12 => Some(v.to_f64().partial_cmp(&0.0)?),
        None => None,
    }
}

fn apply(f: &Func, v: &TaggedReal, ctx: &EvalContext) -> Result<Vec<TaggedReal>> {
    use std::cmp::Ordering::*;
    let one = |t| Ok(vec![t]);
    match f {
        Func::Abs => match v.as_exact() {
            Some(x) => one(TaggedReal::exact(x.abs())),
            None if sign(v) == Some(Less) => one(v.neg()),
            None if sign(v).is_some() => one(v.clone()),
            None => one(TaggedReal::approx(v.to_f64().abs())),
        },
        Func::Exp => one(transcendence_axiom_lookup(TranscendentalForm::Exp, v).value),
        Func::Sqrt => one(sqrt_tagged(v)?),
        Func::DeltaQ => match v.tag() {
            Tag::Rational => one(TaggedReal::exact(QSqrt2::zero())),
            Tag::Irrational => one(TaggedReal::exact(QSqrt2::one())),
            Tag::Unknown => Ok(vec![TaggedReal::exact(QSqrt2::zero()), TaggedReal::exact(QSqrt2::one())]),
        },
        Func::H1 => match sign(v) {
            Some(Less) | Some(Equal) => one(TaggedReal::exact(QSqrt2::zero())),
            Some(Greater) => match v.as_exact() {
                Some(x) => {
                    let arg = -x.pow(2).inv()?;
                    one(transcendence_axiom_lookup(TranscendentalForm::Exp, &TaggedReal::exact(arg)).value)
                }
                None => one(TaggedReal::approx((-1.0 / v.to_f64().powi(2)).exp())),
            },
            None => one(TaggedReal::approx(0.0)),
        },
        Func::W => match v.as_exact() {
            Some(x) => one(TaggedReal::exact(w_exact(x))),
            None => {
                let approx = w_slope().to_f64() * v.to_f64() + QSqrt2::inv_sqrt2().to_f64();
                if v.is_transcendental() {
                    one(TaggedReal::transcendental(approx))
                } else {
                    one(TaggedReal::approx(approx))
                }
            }
        },
        Func::BarGamma => match &ctx.bar_gamma {
            Some(o) => one(o.eval_bar_gamma(v)?),
            None if v.is_exact_zero() => one(TaggedReal::exact(QSqrt2::inv_sqrt2())),
            None => Err(Error::Invalid("barGamma needs a constructed matching map".into())),
        },
        Func::Inv => match v.as_exact() {
            Some(x) => one(TaggedReal::exact(x.inv().map_err(|_| Error::Domain("division by zero".into()))?)),
            None if v.is_transcendental() => one(TaggedReal::transcendental(1.0 / v.to_f64())),
            None if v.tag() == Tag::Irrational => one(TaggedReal::approx_irrational(1.0 / v.to_f64())),
            None => one(TaggedReal::approx(1.0 / v.to_f64())),
        },
        Func::Axiom(name) => Err(Error::Invalid(format!(
            "`{name}` is a formal function governed by axioms and has no values"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::numbers::{int, rat};

    fn at(e: &str, x: QSqrt2) -> Evaluated {
        eval_at(&parse_expr(e).unwrap(), &x, &EvalContext::default()).unwrap()
    }

    #[test]
    fn worked_examples() {
        let v = at("deltaQ(x)", QSqrt2::inv_sqrt2());
        assert_eq!(v.exact(), Some(&QSqrt2::one()));
        assert_eq!(at("abs(x)", QSqrt2::from_int(-1)).exact(), Some(&QSqrt2::one()));
        let h = at("H1(x)", QSqrt2::from_rational(rat(1, 2)));
        let v = h.value().unwrap();
        assert_eq!(v.tag(), Tag::Irrational);
        assert!(v.is_transcendental());
        assert!((v.to_f64() - (-4f64).exp()).abs() < 1e-15);
        assert_eq!(at("w(0)", QSqrt2::zero()).exact(), Some(&QSqrt2::inv_sqrt2()));
        assert_eq!(at("barGamma(H1(x))", QSqrt2::from_int(-5)).exact(), Some(&QSqrt2::inv_sqrt2()));
    }

    #[test]
    fn unknown_tags_give_candidate_sets() {
        // sqrt of an exact irrational has unknown rationality at this level
        let v = at("deltaQ(exp(sqrt2))+1", QSqrt2::zero());
        assert_eq!(v.candidates().len(), 2);
        let v = at("deltaQ(H1(x))", QSqrt2::from_rational(rat(1, 3)));
        assert_eq!(v.exact(), Some(&QSqrt2::one()));
        assert_eq!(at("deltaQ(x)", QSqrt2::from_rational(rat(1, 3))).exact(), Some(&QSqrt2::zero()));
        let _ = int(0);
    }

    #[test]
    fn domain_errors() {
        let ctx = EvalContext::default();
        assert!(eval_at(&parse_expr("sqrt(x)").unwrap(), &QSqrt2::from_int(-1), &ctx).is_err());
        assert!(eval_at(&parse_expr("inv(x)").unwrap(), &QSqrt2::zero(), &ctx).is_err());
        assert!(eval_at(&parse_expr("gamma(x)").unwrap(), &QSqrt2::zero(), &ctx).is_err());
    }
}
