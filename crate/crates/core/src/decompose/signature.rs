//! Generators written as constant vectors times non-smooth atoms, and
//! membership certificates for curves built from them.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::witness::DerivedPlot;
use crate::diffeology::{DVSpace, Plot, PlotTerm};
use crate::error::{Error, Result};
use crate::expr::{classify_smoothness, decompose, Atom, AtomKind, Expr, Func, SmoothStatus};
use crate::linalg::{self, Vector};
use crate::numbers::{fmt_rational, QSqrt2, Rational};

/// Function class of an atom, as far as the closure rules care.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Abs,
    Gamma,
    Delta,
    DeltaSqrt,
    Other,
}

/// The family of `atom` and the smooth function it is applied to.
pub fn family(atom: &Atom) -> (Family, Expr) {
    let smooth = !atom.inner.contains_nonsmooth();
    match (&atom.kind, &atom.inner) {
        (AtomKind::Abs, u) if smooth => (Family::Abs, u.clone()),
        (AtomKind::Axiom(n), u) if smooth && n == "gamma" => (Family::Gamma, u.clone()),
        (AtomKind::DeltaQ, u) if smooth => (Family::Delta, u.clone()),
        (AtomKind::DeltaQ, Expr::Call(Func::Sqrt, s)) => match s.as_ref() {
            Expr::Call(Func::Abs, u) if !u.contains_nonsmooth() => (Family::DeltaSqrt, u.as_ref().clone()),
            _ => (Family::Other, atom.inner.clone()),
        },
        _ => (Family::Other, atom.inner.clone()),
    }
}

/// `v = smooth + sum_a vec_a * atom_a` with constant rational vectors.
#[derive(Clone, Debug)]
pub struct Signature {
    pub smooth: Vec<Expr>,
    pub atoms: BTreeMap<String, (Atom, Vector)>,
}

impl Signature {
    pub fn vector(&self, key: &str, n: usize) -> Vector {
        self.atoms.get(key).map_or_else(|| vec![Rational::zero(); n], |(_, v)| v.clone())
    }

    pub fn is_smooth(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Reads off the atom vectors of a vector of expressions; `None` when some
/// coordinate is not a combination of atoms with rational constant
/// coefficients.
pub fn signature(v: &[Expr]) -> Option<Signature> {
    let n = v.len();
    let mut atoms: BTreeMap<String, (Atom, Vector)> = BTreeMap::new();
    let mut smooth = Vec::with_capacity(n);
    for (k, e) in v.iter().enumerate() {
        let c = decompose(&e.normalize())?;
        smooth.push(c.smooth.clone());
        for (h, a) in &c.atoms {
            let q = h.as_const()?.as_rational()?.clone();
            let entry = atoms
                .entry(a.to_expr().to_string())
                .or_insert_with(|| (a.clone(), vec![Rational::zero(); n]));
            entry.1[k] += q;
        }
    }
    atoms.retain(|_, (_, vec)| !linalg::is_zero_vector(vec));
    Some(Signature { smooth, atoms })
}

/// A generator or a derived plot, usable as a building block.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Source {
    Generator(usize),
    Derived(usize),
}

pub(crate) struct Sources<'a> {
    pub labels: Vec<String>,
    pub sources: Vec<Source>,
    pub values: Vec<Vec<Expr>>,
    pub sigs: Vec<Signature>,
    pub space: &'a DVSpace,
    pub derived: &'a [DerivedPlot],
}

impl<'a> Sources<'a> {
    /// Generators first, then derived plots. `None` if a generator has no
    /// signature.
    pub fn new(space: &'a DVSpace, derived: &'a [DerivedPlot]) -> Option<Self> {
        let mut s = Sources { labels: vec![], sources: vec![], values: vec![], sigs: vec![], space, derived };
        for (i, g) in space.generators.iter().enumerate() {
            s.sigs.push(signature(g)?);
            s.labels.push(format!("g{}", i + 1));
            s.sources.push(Source::Generator(i));
            s.values.push(g.clone());
        }
        for (k, d) in derived.iter().enumerate() {
            if let Some(sig) = signature(&d.claimed) {
                s.sigs.push(sig);
                s.labels.push(d.name.clone());
                s.sources.push(Source::Derived(k));
                s.values.push(d.claimed.clone());
            }
        }
        Some(s)
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    /// Sorted keys of every atom occurring in the sources or `extra`.
    pub fn atom_keys(&self, extra: Option<&Signature>) -> Vec<String> {
        let mut keys: Vec<String> = self.sigs.iter().flat_map(|s| s.atoms.keys().cloned()).collect();
        if let Some(e) = extra {
            keys.extend(e.atoms.keys().cloned());
        }
        keys.sort();
        keys.dedup();
        keys
    }

    /// Source `j` flattened over `keys`, one block of `n` entries per atom.
    pub fn stacked(&self, j: usize, keys: &[String]) -> Vector {
        let n = self.space.dim;
        keys.iter().flat_map(|k| self.sigs[j].vector(k, n)).collect()
    }

    /// `sum_j c_j * source_j` as a normal-form plot.
    pub fn plot(&self, coeffs: &[Rational]) -> Plot {
        let n = self.space.dim;
        let mut p = Plot::zero(n);
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cexpr = Expr::constant(QSqrt2::from_rational(c.clone()));
            let part = match self.sources[j] {
                Source::Generator(i) => Plot {
                    terms: vec![PlotTerm { h: cexpr, generator: i, inner: Expr::x() }],
                    tail: vec![Expr::zero(); n],
                    domain: "R".into(),
                },
                Source::Derived(k) => self.derived[k].plot.scale(&cexpr),
            };
            p = p.add(&part).expect("plots in the same space");
        }
        p
    }

    /// `sum_j c_j * value_j`, normalized.
    pub fn value(&self, coeffs: &[Rational]) -> Vec<Expr> {
        (0..self.space.dim)
            .map(|k| {
                let mut acc = Expr::zero();
                for (j, c) in coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        acc = acc + Expr::constant(QSqrt2::from_rational(c.clone())) * self.values[j][k].clone();
                    }
                }
                acc.normalize()
            })
            .collect()
    }
}

/// Certificate that a curve is a plot of a space: it equals a constant
/// combination of generators and derived plots plus a smooth remainder.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct PlotCertificate {
    pub target: Vec<String>,
    pub combination: Vec<(String, String)>,
    pub remainder: Vec<String>,
    pub plot: String,
    pub derived_used: Vec<String>,
}

fn fmt_exprs(v: &[Expr]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// Searches a combination of sources matching the atom vectors of
/// `target`; the leftover must classify as smooth.
pub fn certify_plot(space: &DVSpace, derived: &[DerivedPlot], target: &[Expr]) -> Option<PlotCertificate> {
    let target: Vec<Expr> = target.iter().map(Expr::normalize).collect();
    let sig = signature(&target)?;
    let src = Sources::new(space, derived)?;
    let keys = src.atom_keys(Some(&sig));
    let n = space.dim;
    let rows: Vec<Vector> = (0..src.len()).map(|j| src.stacked(j, &keys)).collect();
    let want: Vector = keys.iter().flat_map(|k| sig.vector(k, n)).collect();
    let coeffs = if rows.is_empty() {
        if !linalg::is_zero_vector(&want) {
            return None;
        }
        vec![]
    } else {
        linalg::solve_combination(&rows, &want, keys.len() * n)?
    };
    let value = src.value(&coeffs);
    let remainder: Vec<Expr> = target.iter().zip(&value).map(|(t, v)| (t.clone() - v.clone()).normalize()).collect();
    if remainder.iter().any(|r| classify_smoothness(r).status != SmoothStatus::Smooth) {
        return None;
    }
    let plot = src.plot(&coeffs).add(&Plot::smooth(remainder.clone())).ok()?;
    let combination = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (src.labels[j].clone(), fmt_rational(c)))
        .collect::<Vec<_>>();
    let derived_used = coeffs
        .iter()
        .enumerate()
        .filter(|(j, c)| !c.is_zero() && matches!(src.sources[*j], Source::Derived(_)))
        .map(|(j, _)| src.labels[j].clone())
        .collect();
    Some(PlotCertificate {
        target: fmt_exprs(&target),
        combination,
        remainder: fmt_exprs(&remainder),
        plot: plot.to_string(),
        derived_used,
    })
}

/// Re-checks a certificate from its stored data: the combination of source
/// values plus the remainder equals the target, and the remainder is smooth.
pub fn replay_plot_certificate(space: &DVSpace, derived: &[DerivedPlot], cert: &PlotCertificate) -> Result<()> {
    let parse = |s: &String| crate::expr::parse_expr(s);
    let target: Vec<Expr> = cert.target.iter().map(parse).collect::<Result<_>>()?;
    let remainder: Vec<Expr> = cert.remainder.iter().map(parse).collect::<Result<_>>()?;
    let mut total = remainder.clone();
    for (label, c) in &cert.combination {
        let c = crate::numbers::parse_rational(c)?;
        let value: &[Expr] = if let Some(i) = label.strip_prefix('g').and_then(|s| s.parse::<usize>().ok()) {
            space
                .generators
                .get(i.wrapping_sub(1))
                .ok_or_else(|| Error::Verification(format!("no generator {label}")))?
        } else {
            &derived
                .iter()
                .find(|d| &d.name == label)
                .ok_or_else(|| Error::Verification(format!("unknown derived plot {label}")))?
                .claimed
        };
        for (t, v) in total.iter_mut().zip(value) {
            *t = t.clone() + Expr::constant(QSqrt2::from_rational(c.clone())) * v.clone();
        }
    }
    for (k, (t, want)) in total.iter().zip(&target).enumerate() {
        if !(t.clone() - want.clone()).normalize().is_zero() {
            return Err(Error::Verification(format!("coordinate {} of {} does not match", k + 1, fmt_exprs(&target).join(","))));
        }
    }
    if remainder.iter().any(|r| classify_smoothness(r).status != SmoothStatus::Smooth) {
        return Err(Error::Verification("remainder is not smooth".into()));
    }
    Ok(())
}
