use super::{w_slope, Expr, Func};
use crate::error::{Error, Result};
use crate::numbers::{sqrt_tagged, QSqrt2, TaggedReal};

/// Symbolic derivative with respect to `x`, defined on the smooth fragment.
pub fn differentiate(e: &Expr) -> Result<Expr> {
    Ok(d(e)?.simplify())
}

fn d(e: &Expr) -> Result<Expr> {
    Ok(match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(0) => Expr::one(),
        Expr::Var(_) => Expr::zero(),
        Expr::Add(a, b) => d(a)? + d(b)?,
        Expr::Sub(a, b) => d(a)? - d(b)?,
        Expr::Mul(a, b) => d(a)? * (**b).clone() + (**a).clone() * d(b)?,
        Expr::Neg(a) => -d(a)?,
        Expr::Pow(_, 0) => Expr::zero(),
        Expr::Pow(a, k) => Expr::int(*k as i64) * (**a).clone().pow(k - 1) * d(a)?,
        Expr::Call(f, a) => {
            let u = (**a).clone();
            let du = d(a)?;
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Sqrt => Expr::call(Func::Inv, Expr::int(2) * e.clone()),
                Func::H1 => Expr::int(2) * Expr::call(Func::Inv, u).pow(3) * e.clone(),
                Func::W => Expr::constant(w_slope()),
                Func::Inv => -Expr::call(Func::Inv, u).pow(2),
                Func::Abs | Func::DeltaQ | Func::BarGamma | Func::Axiom(_) => {
                    return Err(Error::NotDifferentiable(format!("{} has no symbolic derivative", f.name())))
                }
            };
            outer * du
        }
    })
}

/// Exact value together with left and right derivatives at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    pub v: QSqrt2,
    pub dl: QSqrt2,
    pub dr: QSqrt2,
}

impl Jet {
    fn constant(v: QSqrt2) -> Self {
        Jet { v, dl: QSqrt2::zero(), dr: QSqrt2::zero() }
    }

    /// Outer function with value `v` and derivative `g` at the inner value.
    fn chain(&self, v: QSqrt2, g: &QSqrt2) -> Self {
        Jet { v, dl: g * &self.dl, dr: g * &self.dr }
    }
}

/// Left and right derivatives of a one-variable expression at an exact point.
pub fn one_sided_derivatives(e: &Expr, x: &QSqrt2) -> Result<(QSqrt2, QSqrt2)> {
    let j = jet(e, x)?;
    Ok((j.dl, j.dr))
}

/// Forward-mode evaluation of value and one-sided derivatives.
pub fn jet(e: &Expr, x: &QSqrt2) -> Result<Jet> {
    Ok(match e {
        Expr::Const(c) => Jet::constant(c.clone()),
        Expr::Var(0) => Jet { v: x.clone(), dl: QSqrt2::one(), dr: QSqrt2::one() },
        Expr::Var(k) => return Err(Error::Domain(format!("x_{k} is not bound"))),
        Expr::Add(a, b) => {
            let (a, b) = (jet(a, x)?, jet(b, x)?);
            Jet { v: &a.v + &b.v, dl: &a.dl + &b.dl, dr: &a.dr + &b.dr }
        }
        Expr::Sub(a, b) => {
            let (a, b) = (jet(a, x)?, jet(b, x)?);
            Jet { v: &a.v - &b.v, dl: &a.dl - &b.dl, dr: &a.dr - &b.dr }
        }
        Expr::Mul(a, b) => {
            let (a, b) = (jet(a, x)?, jet(b, x)?);
            Jet {
                v: &a.v * &b.v,
                dl: &(&a.dl * &b.v) + &(&a.v * &b.dl),
                dr: &(&a.dr * &b.v) + &(&a.v * &b.dr),
            }
        }
        Expr::Neg(a) => {
            let a = jet(a, x)?;
            Jet { v: -a.v, dl: -a.dl, dr: -a.dr }
        }
        Expr::Pow(_, 0) => Jet::constant(QSqrt2::one()),
        Expr::Pow(a, k) => {
            let a = jet(a, x)?;
            let g = &QSqrt2::from_int(*k as i64) * &a.v.pow(k - 1);
            a.chain(a.v.pow(*k), &g)
        }
        Expr::Call(f, a) => {
            let u = jet(a, x)?;
            call_jet(f, &u)?
        }
    })
}

fn call_jet(f: &Func, u: &Jet) -> Result<Jet> {
    let not_exact = || Error::NotDifferentiable(format!("{} has no exact value at {}", f.name(), u.v));
    Ok(match f {
        Func::Abs if u.v.is_zero() => Jet { v: QSqrt2::zero(), dl: -u.dl.abs(), dr: u.dr.abs() },
        Func::Abs => {
            let s = QSqrt2::from_int(if u.v.is_positive() { 1 } else { -1 });
            u.chain(u.v.abs(), &s)
        }
        Func::Exp if u.v.is_zero() => u.chain(QSqrt2::one(), &QSqrt2::one()),
        Func::Exp => return Err(not_exact()),
        // flat at 0 to all orders and identically 0 to the left
        Func::H1 if !u.v.is_positive() => Jet::constant(QSqrt2::zero()),
        Func::H1 => return Err(not_exact()),
        Func::Sqrt if u.v.is_positive() => {
            let r = sqrt_tagged(&TaggedReal::exact(u.v.clone()))?.as_exact().cloned().ok_or_else(not_exact)?;
            let g = (&QSqrt2::from_int(2) * &r).inv()?;
            u.chain(r, &g)
        }
        Func::Sqrt => return Err(Error::NotDifferentiable("sqrt at a non-positive point".into())),
        Func::W => u.chain(super::w_exact(&u.v), &w_slope()),
        Func::Inv => {
            let r = u.v.inv()?;
            let g = -r.pow(2);
            u.chain(r, &g)
        }
        Func::DeltaQ | Func::BarGamma | Func::Axiom(_) => {
            return Err(Error::NotDifferentiable(format!("{} has no one-sided derivatives", f.name())))
        }
    })
}

/// Exact derivative at a point, when both one-sided derivatives agree.
pub fn derivative_at(e: &Expr, x: &QSqrt2) -> Result<QSqrt2> {
    let (l, r) = one_sided_derivatives(e, x)?;
    if l == r {
        Ok(l)
    } else {
        Err(Error::NotDifferentiable(format!("one-sided derivatives {l} and {r} differ at {x}")))
    }
}
