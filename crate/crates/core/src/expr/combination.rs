use super::{rebuild_sum, Expr, Func, SumTerm};
use super::rewrite::flatten_sum;
use crate::numbers::QSqrt2;

/// Outer primitive of an exotic atom.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum AtomKind {
    Abs,
    DeltaQ,
    Axiom(String),
}

impl AtomKind {
    pub fn func(&self) -> Func {
        match self {
            AtomKind::Abs => Func::Abs,
            AtomKind::DeltaQ => Func::DeltaQ,
            AtomKind::Axiom(n) => Func::Axiom(n.clone()),
        }
    }
}

/// `kind(inner)`, a single non-smooth primitive applied to an argument.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Atom {
    pub kind: AtomKind,
    pub inner: Expr,
}

impl Atom {
    pub fn to_expr(&self) -> Expr {
        Expr::call(self.kind.func(), self.inner.clone())
    }
}

/// `smooth + sum_i coeff_i * atom_i` with smooth coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct Combination {
    pub smooth: Expr,
    pub atoms: Vec<(Expr, Atom)>,
}

impl Combination {
    pub fn to_expr(&self) -> Expr {
        let mut e = self.smooth.clone();
        for (h, a) in &self.atoms {
            e = e + h.clone() * a.to_expr();
        }
        e.simplify()
    }
}

/// Splits an expression into a smooth part plus smooth multiples of exotic
/// atoms. Fails when some term is a product of two or more non-smooth
/// factors, or a non-smooth primitive sits below a smooth one.
pub fn decompose(e: &Expr) -> Option<Combination> {
    let mut smooth = Vec::new();
    let mut atoms: Vec<(Vec<SumTerm>, Atom)> = Vec::new();
    for t in flatten_sum(e) {
        let ns: Vec<&Expr> = t.nonsmooth_factors().collect();
        match ns.as_slice() {
            [] => smooth.push(t),
            [Expr::Call(f, inner)] if f.is_nonsmooth() => {
                let kind = match f {
                    Func::Abs => AtomKind::Abs,
                    Func::DeltaQ => AtomKind::DeltaQ,
                    Func::Axiom(n) => AtomKind::Axiom(n.clone()),
                    _ => unreachable!(),
                };
                let atom = Atom { kind, inner: inner.simplify() };
                let coeff = SumTerm {
                    coeff: t.coeff.clone(),
                    factors: t.factors.iter().filter(|f| !f.contains_nonsmooth()).cloned().collect(),
                };
                match atoms.iter_mut().find(|(_, a)| *a == atom) {
                    Some((cs, _)) => cs.push(coeff),
                    None => atoms.push((vec![coeff], atom)),
                }
            }
            _ => return None,
        }
    }
    let atoms = atoms
        .into_iter()
        .map(|(cs, a)| (rebuild_sum(&cs).simplify(), a))
        .filter(|(h, _)| !h.is_zero())
        .collect();
    Some(Combination { smooth: rebuild_sum(&smooth).simplify(), atoms })
}

impl Combination {
    /// Constant coefficient of the atom, if its coefficient is constant.
    pub fn const_coeff(&self, atom: &Atom) -> Option<QSqrt2> {
        match self.atoms.iter().find(|(_, a)| a == atom) {
            None => Some(QSqrt2::zero()),
            Some((h, _)) => h.as_const().cloned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn decomposes_linear_combinations() {
        let c = decompose(&parse_expr("2*abs(x)+x^2-abs(x)+x*deltaQ(x)").unwrap()).unwrap();
        assert_eq!(c.smooth, parse_expr("x^2").unwrap());
        assert_eq!(c.atoms.len(), 2);
        let abs = Atom { kind: AtomKind::Abs, inner: Expr::x() };
        assert_eq!(c.const_coeff(&abs), Some(QSqrt2::one()));
        assert!(decompose(&parse_expr("abs(x)*deltaQ(x)").unwrap()).is_none());
        assert!(decompose(&parse_expr("exp(abs(x))").unwrap()).is_none());
        let c = decompose(&parse_expr("abs(x)-abs(x)").unwrap()).unwrap();
        assert!(c.atoms.is_empty() && c.smooth.is_zero());
    }
}
