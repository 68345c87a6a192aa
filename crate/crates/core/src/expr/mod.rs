//! Real-function expression trees over smooth primitives plus the exotic
//! primitives `abs`, `deltaQ` (indicator of irrationals) and formal axiom
//! functions.

mod classify;
mod combination;
mod diff;
mod eval;
mod parse;
mod rewrite;

pub use classify::{
    classify_smoothness, classify_smoothness_with, verify_witness, ClassifyContext, DensityAtom,
    NonSmoothWitness, SmoothStatus, SmoothnessVerdict, AXIOM_GAMMA, AXIOM_SQRT_IMPLICATION,
};
pub use combination::{decompose, Atom, AtomKind, Combination};
pub use diff::{derivative_at, differentiate, jet, one_sided_derivatives, Jet};
pub use eval::{eval_at, eval_tagged, BarGammaOracle, EvalContext, Evaluated};
pub use parse::parse_expr;
pub use rewrite::{
    flatten_sum, rebuild_sum, rewrite_delta_cancellation, LinkSample, RationalityLink, Region, SumTerm,
};

use std::fmt;
use std::ops;

use num_traits::Zero;

use crate::numbers::{fmt_rational, sqrt_tagged, QSqrt2, Rational, TaggedReal};

/// Named unary primitive.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Func {
    Abs,
    Exp,
    Sqrt,
    DeltaQ,
    /// `exp(-1/x^2)` for `x > 0`, `0` otherwise.
    H1,
    /// The affine map `(0,1) -> (1/sqrt2, 1)`.
    W,
    /// `w o f` extended by `1/sqrt2` at `0`, for the constructed matching map `f`.
    BarGamma,
    /// Reciprocal; not in the base grammar, produced by differentiation.
    Inv,
    /// Formal function governed only by named axioms (e.g. `gamma`).
    Axiom(String),
}

impl Func {
    pub fn name(&self) -> &str {
        match self {
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::DeltaQ => "deltaQ",
            Func::H1 => "H1",
            Func::W => "w",
            Func::BarGamma => "barGamma",
            Func::Inv => "inv",
            Func::Axiom(n) => n,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "deltaQ" => Func::DeltaQ,
            "H1" => Func::H1,
            "w" => Func::W,
            "barGamma" => Func::BarGamma,
            "inv" => Func::Inv,
            "gamma" => Func::Axiom("gamma".into()),
            _ => return None,
        })
    }

    pub fn is_nonsmooth(&self) -> bool {
        matches!(self, Func::Abs | Func::DeltaQ | Func::Axiom(_))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    Const(QSqrt2),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

/// Slope of `w`: `(sqrt2 - 1)/sqrt2 = 1 - sqrt2/2`.
pub fn w_slope() -> QSqrt2 {
    QSqrt2::new(crate::numbers::int(1), crate::numbers::rat(-1, 2))
}

/// `w(t) = (1 - sqrt2/2) t + sqrt2/2`.
pub fn w_exact(t: &QSqrt2) -> QSqrt2 {
    &(w_slope() * t) + &QSqrt2::inv_sqrt2()
}

/// Inverse of `w`: `(2q - 1) + (q - 1) sqrt2`.
pub fn w_inverse(q: &QSqrt2) -> QSqrt2 {
    (q - &QSqrt2::inv_sqrt2()).checked_div(&w_slope()).expect("w slope is nonzero")
}

impl Expr {
    pub fn x() -> Expr {
        Expr::Var(0)
    }

    pub fn constant(c: QSqrt2) -> Expr {
        Expr::Const(c)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(QSqrt2::from_int(n))
    }

    pub fn rational(r: Rational) -> Expr {
        Expr::Const(QSqrt2::from_rational(r))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn abs(arg: Expr) -> Expr {
        Expr::call(Func::Abs, arg)
    }

    pub fn delta_q(arg: Expr) -> Expr {
        Expr::call(Func::DeltaQ, arg)
    }

    pub fn h1(arg: Expr) -> Expr {
        Expr::call(Func::H1, arg)
    }

    pub fn bar_gamma(arg: Expr) -> Expr {
        Expr::call(Func::BarGamma, arg)
    }

    pub fn gamma(arg: Expr) -> Expr {
        Expr::call(Func::Axiom("gamma".into()), arg)
    }

    pub fn pow(self, k: u32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn as_const(&self) -> Option<&QSqrt2> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(QSqrt2::is_zero)
    }

    /// Whether a non-smooth primitive occurs anywhere in the tree.
    pub fn contains_nonsmooth(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Call(f, _) if f.is_nonsmooth()))
    }

    pub fn contains_func(&self, func: &Func) -> bool {
        self.any(&|e| matches!(e, Expr::Call(f, _) if f == func))
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.any(pred) || b.any(pred),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.any(pred),
        }
    }

    /// Highest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.max_var().max(b.max_var()),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
        }
    }

    /// Replaces `Var(var)` by `by`.
    pub fn substitute(&self, var: usize, by: &Expr) -> Expr {
        self.map_bottom_up(&|e| match e {
            Expr::Var(i) if i == var => by.clone(),
            other => other,
        })
    }

    /// Replaces every occurrence of the subtree `target` by `by`.
    pub fn replace(&self, target: &Expr, by: &Expr) -> Expr {
        if self == target {
            return by.clone();
        }
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(Box::new(a.replace(target, by)), Box::new(b.replace(target, by))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.replace(target, by)), Box::new(b.replace(target, by))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.replace(target, by)), Box::new(b.replace(target, by))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.replace(target, by))),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.replace(target, by)), *k),
            Expr::Call(f, a) => Expr::Call(f.clone(), Box::new(a.replace(target, by))),
        }
    }

    fn map_bottom_up(&self, f: &dyn Fn(Expr) -> Expr) -> Expr {
        let e = match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.map_bottom_up(f))),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.map_bottom_up(f)), *k),
            Expr::Call(g, a) => Expr::Call(g.clone(), Box::new(a.map_bottom_up(f))),
        };
        f(e)
    }

    /// Coefficients (by degree) when the tree is a polynomial in `x`.
    pub fn as_polynomial(&self) -> Option<Vec<QSqrt2>> {
        let p = match self {
            Expr::Const(c) => vec![c.clone()],
            Expr::Var(0) => vec![QSqrt2::zero(), QSqrt2::one()],
            Expr::Var(_) => return None,
            Expr::Add(a, b) => poly_add(&a.as_polynomial()?, &b.as_polynomial()?),
            Expr::Sub(a, b) => poly_add(&a.as_polynomial()?, &poly_neg(&b.as_polynomial()?)),
            Expr::Mul(a, b) => poly_mul(&a.as_polynomial()?, &b.as_polynomial()?),
            Expr::Neg(a) => poly_neg(&a.as_polynomial()?),
            Expr::Pow(a, k) => {
                let base = a.as_polynomial()?;
                let mut acc = vec![QSqrt2::one()];
                for _ in 0..*k {
                    acc = poly_mul(&acc, &base);
                }
                acc
            }
            Expr::Call(..) => return None,
        };
        Some(trim(p))
    }

    /// Canonical tree for a polynomial: increasing degree, unit coefficients elided.
    pub fn from_polynomial(coeffs: &[QSqrt2]) -> Expr {
        let mut out: Option<Expr> = None;
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = if neg { -c } else { c.clone() };
            let mono = match k {
                0 => None,
                1 => Some(Expr::x()),
                _ => Some(Expr::x().pow(k as u32)),
            };
            let term = match mono {
                None => Expr::Const(mag),
                Some(m) if mag == QSqrt2::one() => m,
                Some(m) => Expr::Mul(Box::new(Expr::Const(mag)), Box::new(m)),
            };
            out = Some(match out {
                None if neg => match term {
                    Expr::Const(m) => Expr::Const(-m),
                    t => Expr::Neg(Box::new(t)),
                },
                None => term,
                Some(acc) if neg => Expr::Sub(Box::new(acc), Box::new(term)),
                Some(acc) => Expr::Add(Box::new(acc), Box::new(term)),
            });
        }
        out.unwrap_or_else(Expr::zero)
    }

    /// Constant folding plus polynomial canonicalization; sound on every point
    /// where the original is defined.
    pub fn simplify(&self) -> Expr {
        let e = match self {
            Expr::Const(_) | Expr::Var(_) => return self.clone(),
            Expr::Add(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if a.is_zero() {
                    b
                } else if b.is_zero() {
                    a
                } else {
                    Expr::Add(Box::new(a), Box::new(b))
                }
            }
            Expr::Sub(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if b.is_zero() {
                    a
                } else if a == b {
                    Expr::zero()
                } else if a.is_zero() {
                    neg_simplified(b)
                } else {
                    Expr::Sub(Box::new(a), Box::new(b))
                }
            }
            Expr::Mul(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if a.is_zero() || b.is_zero() {
                    Expr::zero()
                } else if a.as_const() == Some(&QSqrt2::one()) {
                    b
                } else if b.as_const() == Some(&QSqrt2::one()) {
                    a
                } else {
                    match (&a, &b) {
                        (Expr::Const(c), Expr::Mul(l, r)) if l.as_const().is_some() => Expr::Mul(
                            Box::new(Expr::Const(c * l.as_const().unwrap())),
                            r.clone(),
                        ),
                        (_, Expr::Const(_)) => Expr::Mul(Box::new(b), Box::new(a)),
                        _ => Expr::Mul(Box::new(a), Box::new(b)),
                    }
                }
            }
            Expr::Neg(a) => neg_simplified(a.simplify()),
            Expr::Pow(a, k) => {
                let a = a.simplify();
                match k {
                    0 => Expr::one(),
                    1 => a,
                    _ => Expr::Pow(Box::new(a), *k),
                }
            }
            Expr::Call(f, a) => {
                let a = a.simplify();
                match a.as_const().and_then(|c| fold_call(f, c)) {
                    Some(v) => Expr::Const(v),
                    None => Expr::Call(f.clone(), Box::new(a)),
                }
            }
        };
        match e.as_polynomial() {
            Some(p) if !matches!(e, Expr::Const(_)) => Expr::from_polynomial(&p),
            _ => e,
        }
    }
}

impl Expr {
    /// [`Expr::simplify`] followed by collecting like terms of the expanded sum.
    pub fn normalize(&self) -> Expr {
        let s = self.simplify();
        if s.as_polynomial().is_some() {
            return s;
        }
        rebuild_sum(&flatten_sum(&s)).simplify()
    }
}

fn neg_simplified(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

/// Exact value of a primitive at a constant, when one exists.
fn fold_call(f: &Func, c: &QSqrt2) -> Option<QSqrt2> {
    match f {
        Func::Abs => Some(c.abs()),
        Func::DeltaQ => Some(if c.is_rational() { QSqrt2::zero() } else { QSqrt2::one() }),
        Func::Exp if c.is_zero() => Some(QSqrt2::one()),
        Func::W => Some(w_exact(c)),
        Func::H1 if !c.is_positive() => Some(QSqrt2::zero()),
        Func::BarGamma if c.is_zero() => Some(QSqrt2::inv_sqrt2()),
        Func::Inv => c.inv().ok(),
        Func::Sqrt if !c.is_negative() => {
            sqrt_tagged(&TaggedReal::exact(c.clone())).ok()?.as_exact().cloned()
        }
        _ => None,
    }
}

fn trim(mut p: Vec<QSqrt2>) -> Vec<QSqrt2> {
    while p.len() > 1 && p.last().is_some_and(QSqrt2::is_zero) {
        p.pop();
    }
    p
}

pub(crate) fn poly_add(a: &[QSqrt2], b: &[QSqrt2]) -> Vec<QSqrt2> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) | (None, Some(x)) => x.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub(crate) fn poly_neg(a: &[QSqrt2]) -> Vec<QSqrt2> {
    a.iter().map(|c| -c).collect()
}

pub(crate) fn poly_mul(a: &[QSqrt2], b: &[QSqrt2]) -> Vec<QSqrt2> {
    let mut out = vec![QSqrt2::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// Printing follows the DSL grammar: sums, then products, then signed powers, then atoms.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_sum(self))
    }
}

fn print_sum(e: &Expr) -> String {
    match e {
        Expr::Add(a, b) => format!("{}+{}", print_sum(a), print_term(b)),
        Expr::Sub(a, b) => format!("{}-{}", print_sum(a), print_term(b)),
        _ => print_term(e),
    }
}

fn print_term(e: &Expr) -> String {
    match e {
        Expr::Mul(a, b) => format!("{}*{}", print_term(a), print_factor(b)),
        _ => print_factor(e),
    }
}

fn print_factor(e: &Expr) -> String {
    match e {
        Expr::Neg(inner) => match inner.as_ref() {
            Expr::Neg(_) | Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) => {
                format!("-({})", print_sum(inner))
            }
            // `-c` would re-parse as a negative literal
            Expr::Const(_) => format!("-({})", print_sum(inner)),
            other => format!("-{}", print_power(other)),
        },
        _ => print_power(e),
    }
}

fn print_power(e: &Expr) -> String {
    match e {
        Expr::Pow(base, k) => format!("{}^{}", print_atom(base), k),
        _ => print_atom(e),
    }
}

fn print_atom(e: &Expr) -> String {
    match e {
        Expr::Const(c) => print_const(c),
        Expr::Var(0) => "x".to_string(),
        Expr::Var(i) => format!("x_{i}"),
        Expr::Call(f, arg) => format!("{}({})", f.name(), print_sum(arg)),
        other => format!("({})", print_sum(other)),
    }
}

fn print_const(c: &QSqrt2) -> String {
    if c == &QSqrt2::sqrt2() {
        return "sqrt2".into();
    }
    match c.as_rational() {
        Some(r) if r >= &Rational::zero() => fmt_rational(r),
        Some(r) => format!("({})", fmt_rational(r)),
        None if c.a().is_zero() => format!("({}*sqrt2)", fmt_rational(c.b())),
        None => format!("({c})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::{int, rat};

    #[test]
    fn w_and_inverse() {
        assert_eq!(w_exact(&QSqrt2::zero()), QSqrt2::inv_sqrt2());
        assert_eq!(w_exact(&QSqrt2::one()), QSqrt2::one());
        let q = QSqrt2::from_rational(rat(3, 4));
        let b = w_inverse(&q);
        assert_eq!(b, QSqrt2::new(rat(1, 2), rat(-1, 4)));
        assert_eq!(w_exact(&b), q);
    }

    #[test]
    fn polynomial_canonical_form() {
        let x = Expr::x();
        let e = Expr::int(2) * x.clone() - Expr::int(2) * x.clone() * Expr::one() + x.clone()
            - Expr::int(2) * x.clone();
        assert_eq!(e.simplify().to_string(), "-x");
        let p = (x.clone() + Expr::one()).pow(2);
        assert_eq!(p.simplify().to_string(), "1+2*x+x^2");
        assert_eq!(Expr::rational(rat(-3, 4)).to_string(), "(-3/4)");
        assert_eq!(Expr::from_polynomial(&[QSqrt2::from_int(1), QSqrt2::zero(), QSqrt2::from_int(-3)]).to_string(), "1-3*x^2");
    }

    #[test]
    fn constant_folds() {
        assert_eq!(Expr::delta_q(Expr::Const(QSqrt2::inv_sqrt2())).simplify(), Expr::one());
        assert_eq!(Expr::delta_q(Expr::rational(rat(1, 3))).simplify(), Expr::zero());
        assert_eq!(Expr::abs(Expr::int(-1)).simplify(), Expr::one());
        assert_eq!(Expr::h1(Expr::int(-5)).simplify(), Expr::zero());
        assert_eq!(
            Expr::bar_gamma(Expr::h1(Expr::int(-5))).simplify(),
            Expr::Const(QSqrt2::inv_sqrt2())
        );
        assert_eq!(Expr::call(Func::W, Expr::zero()).simplify(), Expr::Const(QSqrt2::inv_sqrt2()));
        let _ = int(0);
    }
}
