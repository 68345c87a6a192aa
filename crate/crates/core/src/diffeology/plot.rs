use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{DVSpace, LinearMap, Subspace};
use crate::error::{Error, Result};
use crate::expr::{eval_tagged, EvalContext, Evaluated, Expr};
use crate::linalg::Vector;
use crate::numbers::{fmt_rational, rational_abs, TaggedReal};

/// `h * (g o H)` for the generator with index `generator`.
#[derive(Clone, PartialEq, Debug)]
pub struct PlotTerm {
    pub h: Expr,
    pub generator: usize,
    pub inner: Expr,
}

/// A plot in normal form `sum_i h_i * (g_i o H_i) + tail`, where `h_i`,
/// `H_i` and the tail are smooth functions on the domain.
#[derive(Clone, PartialEq, Debug)]
pub struct Plot {
    pub terms: Vec<PlotTerm>,
    pub tail: Vec<Expr>,
    pub domain: String,
}

impl Plot {
    pub fn zero(n: usize) -> Self {
        Plot { terms: vec![], tail: vec![Expr::zero(); n], domain: "R".into() }
    }

    /// The generator itself: `x -> g_i(x)`.
    pub fn generator(space: &DVSpace, i: usize) -> Self {
        Plot {
            terms: vec![PlotTerm { h: Expr::one(), generator: i, inner: Expr::x() }],
            tail: vec![Expr::zero(); space.dim],
            domain: "R".into(),
        }
    }

    /// A smooth curve, i.e. a plot with no generator terms.
    pub fn smooth(tail: Vec<Expr>) -> Self {
        Plot { terms: vec![], tail, domain: "R".into() }
    }

    pub fn codim(&self) -> usize {
        self.tail.len()
    }

    pub fn add(&self, other: &Plot) -> Result<Plot> {
        if self.codim() != other.codim() {
            return Err(Error::Shape("plots land in different spaces".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        let tail = self.tail.iter().zip(&other.tail).map(|(a, b)| (a.clone() + b.clone()).simplify()).collect();
        Ok(Plot { terms, tail, domain: self.domain.clone() })
    }

    /// Multiplies by a smooth real function.
    pub fn scale(&self, s: &Expr) -> Plot {
        Plot {
            terms: self
                .terms
                .iter()
                .map(|t| PlotTerm { h: (s.clone() * t.h.clone()).simplify(), ..t.clone() })
                .collect(),
            tail: self.tail.iter().map(|a| (s.clone() * a.clone()).simplify()).collect(),
            domain: self.domain.clone(),
        }
    }

    /// Precomposes with a smooth map of the domain.
    pub fn precompose(&self, phi: &Expr) -> Plot {
        let sub = |e: &Expr| e.substitute(0, phi).simplify();
        Plot {
            terms: self
                .terms
                .iter()
                .map(|t| PlotTerm { h: sub(&t.h), generator: t.generator, inner: sub(&t.inner) })
                .collect(),
            tail: self.tail.iter().map(sub).collect(),
            domain: self.domain.clone(),
        }
    }

    /// Coordinate functions `sum_i h_i * g_i(H_i) + tail`.
    pub fn realize(&self, space: &DVSpace) -> Result<Vec<Expr>> {
        if self.codim() != space.dim {
            return Err(Error::Shape(format!("plot has {} coordinates, space has {}", self.codim(), space.dim)));
        }
        let mut out = self.tail.clone();
        for t in &self.terms {
            let g = space
                .generators
                .get(t.generator)
                .ok_or_else(|| Error::Shape(format!("no generator {}", t.generator)))?;
            for (o, gj) in out.iter_mut().zip(g) {
                if !gj.is_zero() {
                    *o = o.clone() + t.h.clone() * gj.substitute(0, &t.inner);
                }
            }
        }
        Ok(out.into_iter().map(|e| e.normalize()).collect())
    }
}

impl fmt::Display for Plot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("({})*g{}({})", t.h, t.generator + 1, t.inner))
            .collect();
        if self.tail.iter().any(|e| !e.is_zero()) {
            parts.push(format!("({})", self.tail.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Componentwise tagged evaluation.
pub fn plot_eval(space: &DVSpace, p: &Plot, u: &[TaggedReal], ctx: &EvalContext) -> Result<Vec<Evaluated>> {
    p.realize(space)?.iter().map(|e| eval_tagged(e, u, ctx)).collect()
}

/// The space `R^m` with the pushforward of the diffeology of `space` by `l`.
pub fn pushforward_space(l: &LinearMap, space: &DVSpace) -> Result<DVSpace> {
    if l.ncols != space.dim {
        return Err(Error::Shape(format!("map has {} columns, space has dimension {}", l.ncols, space.dim)));
    }
    let gens = space.generators.iter().map(|g| l.apply_exprs(g)).collect();
    DVSpace::new(format!("{}-pushforward", space.name), l.nrows(), gens, space.axioms.clone())
}

/// `l o p` as a plot of [`pushforward_space`]; terms whose generator is
/// mapped to zero are dropped.
pub fn pushforward(l: &LinearMap, space: &DVSpace, p: &Plot) -> Result<Plot> {
    if l.ncols != p.codim() {
        return Err(Error::Shape(format!("map has {} columns, plot has {} coordinates", l.ncols, p.codim())));
    }
    let pushed = pushforward_space(l, space)?;
    let terms = p
        .terms
        .iter()
        .filter(|t| pushed.generators[t.generator].iter().any(|e| !e.is_zero()))
        .cloned()
        .collect();
    Ok(Plot { terms, tail: l.apply_exprs(&p.tail), domain: p.domain.clone() })
}

/// Product diffeology on `V0 x V1`: the generators of each factor, included.
pub fn product_space(v0: &DVSpace, v1: &DVSpace) -> DVSpace {
    let n = v0.dim + v1.dim;
    let mut gens = Vec::new();
    for g in &v0.generators {
        let mut v = g.clone();
        v.resize(n, Expr::zero());
        gens.push(v);
    }
    for g in &v1.generators {
        let mut v = vec![Expr::zero(); v0.dim];
        v.extend(g.iter().cloned());
        gens.push(v);
    }
    let mut axioms = v0.axioms.clone();
    for a in &v1.axioms {
        if !axioms.contains(a) {
            axioms.push(a.clone());
        }
    }
    DVSpace { name: format!("{}x{}", v0.name, v1.name), dim: n, generators: gens, axioms }
}

/// One annihilating functional `phi` of a subspace `W` and the generator
/// images `phi o g_i`: a plot lies in `W` iff
/// `sum_i sum_k h_ik * (phi o g_i)(H_ik) + phi(tail) = 0` identically.
#[derive(Clone, PartialEq, Debug)]
pub struct SubsetCondition {
    pub functional: Vector,
    pub images: Vec<Expr>,
}

impl SubsetCondition {
    /// `phi o p` for a concrete plot.
    pub fn apply(&self, space: &DVSpace, p: &Plot) -> Result<Expr> {
        let coords = p.realize(space)?;
        let row = LinearMap { rows: vec![self.functional.clone()], ncols: self.functional.len() };
        Ok(row.apply_exprs(&coords).remove(0))
    }
}

impl fmt::Display for SubsetCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, img) in self.images.iter().enumerate() {
            if !img.is_zero() {
                parts.push(format!("sum_k h{i}k*[{img}](H{i}k)", i = i + 1));
            }
        }
        let mut tail = String::new();
        for (j, c) in self.functional.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if tail.is_empty() { "" } else { "+" };
            let mag = rational_abs(c);
            let coeff = if mag.is_one() { String::new() } else { format!("{}*", fmt_rational(&mag)) };
            tail.push_str(&format!("{sign}{coeff}alpha{}", j + 1));
        }
        if !tail.is_empty() {
            parts.push(tail);
        }
        write!(f, "{} = 0", parts.join(" + "))
    }
}

/// Conditions for a generic plot of `space` to lie in the subspace `w`.
pub fn subset_constraints(space: &DVSpace, w: &Subspace) -> Vec<SubsetCondition> {
    w.annihilator()
        .into_iter()
        .map(|phi| {
            let row = LinearMap { rows: vec![phi.clone()], ncols: space.dim };
            let images = space.generators.iter().map(|g| row.apply_exprs(g).remove(0)).collect();
            SubsetCondition { functional: phi, images }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::numbers::QSqrt2;
    use crate::numbers::{int, rat};
    use rand::{Rng, SeedableRng};

    fn space(dim: usize, gens: &[&[&str]]) -> DVSpace {
        let g = gens.iter().map(|g| g.iter().map(|s| parse_expr(s).unwrap()).collect()).collect();
        DVSpace::new("t", dim, g, vec![]).unwrap()
    }

    fn v2() -> DVSpace {
        space(2, &[&["abs(x)", "abs(x)"], &["0", "deltaQ(x)"]])
    }

    fn exact_values(space: &DVSpace, p: &Plot, x: QSqrt2) -> Vec<QSqrt2> {
        plot_eval(space, p, &[TaggedReal::exact(x)], &EvalContext::default())
            .unwrap()
            .iter()
            .map(|v| v.exact().unwrap().clone())
            .collect()
    }

    #[test]
    fn evaluation_examples() {
        let v = v2();
        let p = Plot::generator(&v, 0);
        assert_eq!(exact_values(&v, &p, QSqrt2::from_int(-2)), vec![QSqrt2::from_int(2); 2]);
        let q = Plot::generator(&v, 1);
        assert_eq!(exact_values(&v, &q, QSqrt2::from_rational(rat(1, 3))), vec![QSqrt2::zero(); 2]);
        assert_eq!(exact_values(&v, &Plot::zero(2), QSqrt2::sqrt2()), vec![QSqrt2::zero(); 2]);
    }

    #[test]
    fn pushforward_examples() {
        let v = space(3, &[&["0", "abs(x)", "abs(x)"]]);
        let l = LinearMap::parse("[[1,0,0],[0,1,0],[0,0,0]]").unwrap();
        let p = pushforward(&l, &v, &Plot::generator(&v, 0)).unwrap();
        let pushed = pushforward_space(&l, &v).unwrap();
        assert_eq!(p.realize(&pushed).unwrap(), vec![Expr::zero(), Expr::abs(Expr::x()), Expr::zero()]);
        let id = pushforward(&LinearMap::identity(3), &v, &Plot::generator(&v, 0)).unwrap();
        assert_eq!(id, Plot::generator(&v, 0));
        let z = pushforward(&LinearMap::zero(3, 3), &v, &Plot::generator(&v, 0)).unwrap();
        assert_eq!(z, Plot::zero(3));
        assert!(pushforward(&LinearMap::identity(2), &v, &Plot::generator(&v, 0)).is_err());
    }

    #[test]
    fn subset_constraint_examples() {
        let g = space(2, &[&["gamma(x)", "gamma(x)"], &["0", "abs(x)"]]);
        let cs = subset_constraints(&g, &Subspace::coords(2, &[1]));
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].to_string(), "sum_k h1k*[gamma(x)](H1k) + sum_k h2k*[abs(x)](H2k) + alpha2 = 0");
        assert!(subset_constraints(&g, &Subspace::whole(2)).is_empty());
        let r3 = space(3, &[&["0", "abs(x)", "abs(x)"]]);
        let w = Subspace::span(3, &[vec![int(0), int(1), int(1)]]);
        let cs = subset_constraints(&r3, &w);
        assert_eq!(cs.iter().map(|c| c.functional.clone()).collect::<Vec<_>>(), w.annihilator());
        assert_eq!(cs[0].to_string(), "alpha1 = 0");
        assert_eq!(cs[1].to_string(), "alpha2-alpha3 = 0");
        for c in &cs {
            for b in &w.basis {
                assert!(crate::linalg::dot(&c.functional, b).is_zero());
            }
        }
        // the generator itself lies in W
        for c in &cs {
            assert!(c.apply(&r3, &Plot::generator(&r3, 0)).unwrap().is_zero());
        }
    }

    #[test]
    fn product_examples() {
        assert_eq!(product_space(&DVSpace::standard(1), &DVSpace::standard(1)).generators.len(), 0);
        let a = space(1, &[&["abs(x)"]]);
        let p = product_space(&a, &DVSpace::standard(1));
        assert_eq!(p.generators, vec![vec![Expr::abs(Expr::x()), Expr::zero()]]);
        let b = space(1, &[&["abs(x)"], &["deltaQ(x)"]]);
        let p = product_space(&a, &b);
        assert_eq!(p.dim, 2);
        assert_eq!(p.generators.len(), 3);
        assert_eq!(p.generators[2], vec![Expr::zero(), Expr::delta_q(Expr::x())]);
    }

    #[test]
    fn normal_form_closure() {
        let v = v2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let smooth = ["x", "x^2+1", "3*x-1/2", "w(x)", "2"];
        for _ in 0..50 {
            let mut pick = || parse_expr(smooth[rng.gen_range(0..smooth.len())]).unwrap();
            let p = Plot { terms: vec![PlotTerm { h: pick(), generator: 0, inner: pick() }], tail: vec![pick(), pick()], domain: "R".into() };
            let q = Plot { terms: vec![PlotTerm { h: pick(), generator: 1, inner: pick() }], tail: vec![pick(), pick()], domain: "R".into() };
            let s = pick();
            let phi = pick();
            let ctx = EvalContext::default();
            for k in -3..4 {
                let x = QSqrt2::from_rational(rat(k, 3));
                let at = |pl: &Plot, x: &QSqrt2| exact_values(&v, pl, x.clone());
                let sum = at(&p.add(&q).unwrap(), &x);
                let expect: Vec<_> = at(&p, &x).iter().zip(at(&q, &x)).map(|(a, b)| a + &b).collect();
                assert_eq!(sum, expect);
                let sv = eval_tagged(&s, &[TaggedReal::exact(x.clone())], &ctx).unwrap().exact().unwrap().clone();
                let scaled: Vec<_> = at(&p, &x).iter().map(|a| &sv * a).collect();
                assert_eq!(at(&p.scale(&s), &x), scaled);
                let px = eval_tagged(&phi, &[TaggedReal::exact(x.clone())], &ctx).unwrap().exact().unwrap().clone();
                assert_eq!(at(&p.precompose(&phi), &x), at(&p, &px));
            }
        }
    }
}
