use serde::{Deserialize, Serialize};

use super::{Expr, Func};
use crate::error::{Error, Result};
use crate::numbers::{QSqrt2, Tag};

/// A half-line (or the whole line) of the first variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Region {
    /// `x <= 0`
    NonPositive,
    /// `x > 0`
    Positive,
    All,
}

impl Region {
    pub fn covers(&self, other: Region) -> bool {
        *self == Region::All || *self == other
    }
}

/// One audited point of a rationality link.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LinkSample {
    pub x: String,
    pub tag_a: Tag,
    pub tag_b: Tag,
    pub reason: String,
}

/// The claim `A(x) in Q <=> B(x) in Q` on the listed regions, with the
/// sample audit that backs it.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RationalityLink {
    pub a: String,
    pub b: String,
    pub regions: Vec<Region>,
    /// Caveat on the claim, e.g. the truncation order of an approximated map.
    pub scope: String,
    pub samples: Vec<LinkSample>,
    /// Points that were asked for but left outside the link.
    pub excluded: Vec<String>,
}

impl RationalityLink {
    pub fn covers(&self, region: Region) -> bool {
        self.regions.iter().any(|r| r.covers(region))
            || (region == Region::All
                && self.regions.contains(&Region::Positive)
                && self.regions.contains(&Region::NonPositive))
    }

    fn links(&self, p: &Expr, q: &Expr) -> bool {
        let (a, b) = (p.to_string(), q.to_string());
        (a == self.a && b == self.b) || (a == self.b && b == self.a)
    }
}

/// `coeff * factors[0] * factors[1] * ...`, factors kept in a canonical order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SumTerm {
    pub coeff: QSqrt2,
    pub factors: Vec<Expr>,
}

impl SumTerm {
    pub fn to_expr(&self) -> Expr {
        let mut out: Option<Expr> = None;
        for f in &self.factors {
            out = Some(match out {
                None => f.clone(),
                Some(acc) => acc * f.clone(),
            });
        }
        match out {
            None => Expr::Const(self.coeff.clone()),
            Some(e) if self.coeff == QSqrt2::one() => e,
            Some(e) => Expr::Const(self.coeff.clone()) * e,
        }
    }

    pub fn nonsmooth_factors(&self) -> impl Iterator<Item = &Expr> {
        self.factors.iter().filter(|f| f.contains_nonsmooth())
    }

    /// Product of the factors free of non-smooth primitives, with the coefficient.
    pub fn smooth_part(&self) -> Expr {
        SumTerm {
            coeff: self.coeff.clone(),
            factors: self.factors.iter().filter(|f| !f.contains_nonsmooth()).cloned().collect(),
        }
        .to_expr()
    }
}

/// Expands sums and products into a list of monomial-like terms. Like terms
/// are merged and zero terms dropped.
pub fn flatten_sum(e: &Expr) -> Vec<SumTerm> {
    let mut terms = Vec::new();
    expand(e, &mut terms);
    merge(terms)
}

fn expand(e: &Expr, out: &mut Vec<SumTerm>) {
    match e {
        Expr::Const(c) => out.push(SumTerm { coeff: c.clone(), factors: vec![] }),
        Expr::Add(a, b) => {
            expand(a, out);
            expand(b, out);
        }
        Expr::Sub(a, b) => {
            expand(a, out);
            let mut rhs = Vec::new();
            expand(b, &mut rhs);
            out.extend(rhs.into_iter().map(|t| SumTerm { coeff: -t.coeff, factors: t.factors }));
        }
        Expr::Neg(a) => {
            let mut inner = Vec::new();
            expand(a, &mut inner);
            out.extend(inner.into_iter().map(|t| SumTerm { coeff: -t.coeff, factors: t.factors }));
        }
        Expr::Mul(a, b) => {
            let (mut l, mut r) = (Vec::new(), Vec::new());
            expand(a, &mut l);
            expand(b, &mut r);
            for x in &l {
                for y in &r {
                    let mut factors = x.factors.clone();
                    factors.extend(y.factors.iter().cloned());
                    out.push(SumTerm { coeff: &x.coeff * &y.coeff, factors });
                }
            }
        }
        Expr::Pow(a, k) if matches!(**a, Expr::Var(_)) => {
            out.push(SumTerm { coeff: QSqrt2::one(), factors: vec![(**a).clone(); *k as usize] })
        }
        Expr::Var(_) | Expr::Pow(..) | Expr::Call(..) => {
            out.push(SumTerm { coeff: QSqrt2::one(), factors: vec![e.clone()] })
        }
    }
}

fn merge(terms: Vec<SumTerm>) -> Vec<SumTerm> {
    let mut out: Vec<(Vec<String>, SumTerm)> = Vec::new();
    for mut t in terms {
        t.factors.sort_by_cached_key(|f| f.to_string());
        let key: Vec<String> = t.factors.iter().map(|f| f.to_string()).collect();
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, acc)) => acc.coeff = &acc.coeff + &t.coeff,
            None => out.push((key, t)),
        }
    }
    out.into_iter().map(|(_, t)| t).filter(|t| !t.coeff.is_zero()).collect()
}

pub fn rebuild_sum(terms: &[SumTerm]) -> Expr {
    let mut out: Option<Expr> = None;
    for t in terms {
        let neg = t.coeff.is_negative();
        let body = if neg {
            SumTerm { coeff: -t.coeff.clone(), factors: t.factors.clone() }.to_expr()
        } else {
            t.to_expr()
        };
        out = Some(match (out, neg) {
            (None, false) => body,
            (None, true) => -body,
            (Some(acc), false) => acc + body,
            (Some(acc), true) => acc - body,
        });
    }
    out.unwrap_or_else(Expr::zero)
}

/// The argument of a lone `deltaQ` factor together with the remaining factors.
fn delta_split(t: &SumTerm) -> Option<(Expr, Vec<Expr>)> {
    let mut found = None;
    let mut rest = Vec::new();
    for f in &t.factors {
        match f {
            Expr::Call(Func::DeltaQ, a) if found.is_none() => found = Some((**a).clone()),
            other => rest.push(other.clone()),
        }
    }
    found.map(|a| (a, rest))
}

/// Cancels `h*deltaQ(A) - h*deltaQ(B)` pairs allowed by `link` on `region`,
/// and evaluates `H1(x)` to `0` on `x <= 0`. Pairs with identical arguments
/// cancel on every region.
pub fn rewrite_delta_cancellation(e: &Expr, link: Option<&RationalityLink>, region: Region) -> Result<Expr> {
    if let Some(l) = link {
        if !l.covers(region) {
            return Err(Error::RegionNotCovered(format!("link between {} and {} does not cover {region:?}", l.a, l.b)));
        }
    }
    let e = if region == Region::NonPositive {
        e.replace(&Expr::h1(Expr::x()), &Expr::zero()).simplify()
    } else {
        e.clone()
    };
    let mut terms = flatten_sum(&e);
    let mut i = 0;
    'outer: while i < terms.len() {
        if let Some((a, rest_a)) = delta_split(&terms[i]) {
            for j in i + 1..terms.len() {
                let Some((b, rest_b)) = delta_split(&terms[j]) else { continue };
                let same_h = rest_a == rest_b && terms[i].coeff == -terms[j].coeff.clone();
                let linked = a == b || link.is_some_and(|l| l.links(&a, &b));
                if same_h && linked {
                    terms.remove(j);
                    terms.remove(i);
                    continue 'outer;
                }
            }
        }
        i += 1;
    }
    Ok(rebuild_sum(&terms).simplify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval_at, parse_expr, EvalContext};
    use crate::numbers::rat;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn link() -> RationalityLink {
        RationalityLink {
            a: "H1(x)".into(),
            b: "barGamma(H1(x))".into(),
            regions: vec![Region::NonPositive, Region::Positive],
            scope: String::new(),
            samples: vec![],
            excluded: vec![],
        }
    }

    #[test]
    fn flatten_merges_like_terms() {
        let t = flatten_sum(&p("2*x*deltaQ(x) - x*deltaQ(x) + 3 - 3"));
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].coeff, QSqrt2::one());
        assert_eq!(flatten_sum(&rebuild_sum(&t)), flatten_sum(&p("x*deltaQ(x)")));
    }

    #[test]
    fn cancellation_examples() {
        let e = p("2*x*deltaQ(H1(x))-2*x*deltaQ(barGamma(H1(x)))");
        assert!(rewrite_delta_cancellation(&e, Some(&link()), Region::Positive).unwrap().is_zero());
        let neg = rewrite_delta_cancellation(&e, Some(&link()), Region::NonPositive).unwrap();
        assert_eq!(neg, p("-2*x").simplify());
        let same = p("x^2*deltaQ(exp(x)) - x^2*deltaQ(exp(x))");
        assert!(rewrite_delta_cancellation(&same, None, Region::All).unwrap().is_zero());
        // unlinked pairs stay
        let other = p("x*deltaQ(x)-x*deltaQ(H1(x))");
        assert!(!rewrite_delta_cancellation(&other, Some(&link()), Region::Positive).unwrap().is_zero());
    }

    #[test]
    fn region_must_be_covered() {
        let mut l = link();
        l.regions = vec![Region::NonPositive];
        let e = p("x*deltaQ(H1(x))");
        assert!(matches!(
            rewrite_delta_cancellation(&e, Some(&l), Region::Positive),
            Err(Error::RegionNotCovered(_))
        ));
    }

    #[test]
    fn rewrite_preserves_values_on_nonpositive_points() {
        let e = p("2*x*deltaQ(H1(x))-2*x*deltaQ(barGamma(H1(x)))+x");
        let r = rewrite_delta_cancellation(&e, Some(&link()), Region::NonPositive).unwrap();
        let ctx = EvalContext::default();
        for k in 0..200 {
            let x = QSqrt2::from_rational(rat(-k, 7));
            assert_eq!(eval_at(&e, &x, &ctx).unwrap().exact(), eval_at(&r, &x, &ctx).unwrap().exact());
        }
    }
}
