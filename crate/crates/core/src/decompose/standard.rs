//! Deciding whether the subset diffeology of a subspace is standard.
//!
//! A plot of `V` is `sum_j v_j * S_j + smooth`, one unknown function `S_j`
//! per pair (generator, atom): `S_j = sum_k h_k * atom(H_k)` with the `h_k`,
//! `H_k` of that generator's terms. Landing in `W` makes `phi(plot)` vanish
//! for every `phi` in the annihilator, so `sum_j phi(v_j) S_j` is smooth.
//! The relations are closed under linear combination and the axiom rules;
//! `W` is standard once every coordinate `sum_j v_j[k] S_j` is a relation.

use serde::Serialize;

use super::signature::{family, Family, Signature, Sources};
use super::witness::WitnessSet;
use crate::diffeology::{fmt_vector, DVSpace, Subspace};
use crate::expr::{
    classify_smoothness_with, ClassifyContext, SmoothStatus, SmoothnessVerdict, AXIOM_GAMMA, AXIOM_SQRT_IMPLICATION,
};
use crate::linalg::{self, Vector};
use crate::numbers::{fmt_rational, int, Rational};
use num_traits::Zero;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Standardness {
    Standard,
    NonStandard,
    Unknown,
}

/// A plot of `V` inside `W` that is not smooth.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct SubsetWitness {
    pub combination: Vec<(String, String)>,
    pub plot: String,
    pub value: Vec<String>,
    pub coordinate: usize,
    pub verdict: SmoothnessVerdict,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct StandardnessCertificate {
    pub subspace: Subspace,
    pub status: Standardness,
    pub derivation: Vec<String>,
    pub axioms_used: Vec<String>,
    pub witness: Option<SubsetWitness>,
    pub reason: Option<String>,
}

impl StandardnessCertificate {
    fn new(w: &Subspace, status: Standardness) -> Self {
        StandardnessCertificate {
            subspace: w.clone(),
            status,
            derivation: vec![],
            axioms_used: vec![],
            witness: None,
            reason: None,
        }
    }

    pub fn is_standard(&self) -> bool {
        self.status == Standardness::Standard
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Column {
    pub label: String,
    pub generator: usize,
    pub family: Family,
    pub base: String,
    pub vector: Vector,
}

pub(crate) fn columns(sigs: &[Signature]) -> Vec<Column> {
    let mut out = Vec::new();
    for (i, s) in sigs.iter().enumerate() {
        for (key, (atom, v)) in &s.atoms {
            let (fam, base) = family(atom);
            out.push(Column {
                label: format!("g{}:{key}", i + 1),
                generator: i,
                family: fam,
                base: base.to_string(),
                vector: v.clone(),
            });
        }
    }
    out
}

/// Result of closing the relations of a subspace.
pub(crate) struct Closure {
    pub standard: bool,
    /// Every column was forced smooth on its own.
    pub all_units: bool,
    pub derivation: Vec<String>,
    pub fired: Vec<&'static str>,
}

fn unit(m: usize, j: usize) -> Vector {
    let mut v = vec![Rational::zero(); m];
    v[j] = int(1);
    v
}

fn describe(cols: &[Column], r: &[Rational]) -> String {
    let parts: Vec<String> = r
        .iter()
        .zip(cols)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, col)| {
            if *c == int(1) {
                format!("S[{}]", col.label)
            } else {
                format!("({})*S[{}]", fmt_rational(c), col.label)
            }
        })
        .collect();
    format!("{} is smooth", parts.join(" + "))
}

struct Rel<'a> {
    cols: &'a [Column],
    rows: Vec<Vector>,
    log: Vec<String>,
}

impl Rel<'_> {
    fn m(&self) -> usize {
        self.cols.len()
    }

    fn has(&self, r: &[Rational]) -> bool {
        linalg::in_span(&self.rows, r, self.m())
    }

    fn add(&mut self, r: Vector, why: String) -> bool {
        if linalg::is_zero_vector(&r) || self.has(&r) {
            return false;
        }
        self.log.push(format!("{why}: {}", describe(self.cols, &r)));
        self.rows.push(r);
        self.rows = linalg::rref(&self.rows, self.m()).0;
        true
    }

    /// Relations supported on abs and gamma columns split into their abs
    /// and gamma parts.
    fn separate(&mut self) -> bool {
        let m = self.m();
        let other: Vec<usize> = (0..m)
            .filter(|&j| !matches!(self.cols[j].family, Family::Abs | Family::Gamma))
            .collect();
        let k = self.rows.len();
        if k == 0 {
            return false;
        }
        let mat: Vec<Vector> = other.iter().map(|&o| self.rows.iter().map(|r| r[o].clone()).collect()).collect();
        let combos = if other.is_empty() { (0..k).map(|i| unit(k, i)).collect() } else { linalg::nullspace(&mat, k) };
        let mut changed = false;
        for y in combos {
            let mut r = vec![Rational::zero(); m];
            for (yi, row) in y.iter().zip(&self.rows.clone()) {
                for (a, b) in r.iter_mut().zip(row) {
                    *a += yi * b;
                }
            }
            for fam in [Family::Gamma, Family::Abs] {
                let part: Vector = r
                    .iter()
                    .zip(self.cols)
                    .map(|(c, col)| if col.family == fam { c.clone() } else { Rational::zero() })
                    .collect();
                changed |= self.add(part, format!("axiom {AXIOM_GAMMA} separates gamma and abs terms"));
            }
        }
        changed
    }

    /// `S[g:a]` smooth forces `S[g:b]` smooth for the same generator and base.
    fn imply(&mut self, from: Family, to: Family, why: &str) -> bool {
        let m = self.m();
        let mut changed = false;
        for a in 0..m {
            if self.cols[a].family != from || !self.has(&unit(m, a)) {
                continue;
            }
            for b in 0..m {
                let (ca, cb) = (&self.cols[a], &self.cols[b]);
                if cb.family == to && cb.generator == ca.generator && cb.base == ca.base {
                    changed |= self.add(unit(m, b), why.to_string());
                }
            }
        }
        changed
    }
}

/// Closes the relations `annihilator * V` under the rules enabled by `rules`.
pub(crate) fn close(n: usize, cols: &[Column], w: &Subspace, rules: &[&str]) -> Closure {
    let m = cols.len();
    let mut rel = Rel { cols, rows: vec![], log: vec![] };
    for phi in w.annihilator() {
        let r: Vector = cols.iter().map(|c| linalg::dot(&phi, &c.vector)).collect();
        rel.add(r, format!("{} vanishes on W", fmt_vector(&phi)));
    }
    let mut fired = Vec::new();
    loop {
        let mut changed = false;
        if rules.contains(&AXIOM_GAMMA) {
            let mut c = rel.separate();
            c |= rel.imply(Family::Gamma, Family::Abs, "axiom A couples the gamma and abs terms of one generator");
            c |= rel.imply(Family::Abs, Family::Gamma, "axiom A couples the gamma and abs terms of one generator");
            if c && !fired.contains(&AXIOM_GAMMA) {
                fired.push(AXIOM_GAMMA);
            }
            changed |= c;
        }
        if rules.contains(&AXIOM_SQRT_IMPLICATION) {
            let c = rel.imply(Family::DeltaSqrt, Family::Delta, "the sqrt implication");
            if c && !fired.contains(&AXIOM_SQRT_IMPLICATION) {
                fired.push(AXIOM_SQRT_IMPLICATION);
            }
            changed |= c;
        }
        if !changed {
            break;
        }
    }
    let standard = (0..n).all(|k| {
        let row: Vector = cols.iter().map(|c| c.vector[k].clone()).collect();
        rel.has(&row)
    });
    let all_units = (0..m).all(|j| rel.has(&unit(m, j)));
    Closure { standard, all_units, derivation: rel.log, fired }
}

/// Rule sets tried in order, the first that suffices is reported.
pub(crate) fn rule_sets(ctx: &ClassifyContext) -> Vec<Vec<&'static str>> {
    let mut sets = vec![vec![]];
    let a = ctx.has_axiom(AXIOM_GAMMA);
    let s = ctx.has_axiom(AXIOM_SQRT_IMPLICATION);
    if a {
        sets.push(vec![AXIOM_GAMMA]);
    }
    if s {
        sets.push(vec![AXIOM_SQRT_IMPLICATION]);
    }
    if a && s {
        sets.push(vec![AXIOM_GAMMA, AXIOM_SQRT_IMPLICATION]);
    }
    sets
}

/// Looks for `c` with `sum_j c_j * source_j` inside `W` atom by atom and
/// some coordinate of its non-smooth part classified `NonSmooth`.
pub fn nonstandard_witness(
    v: &DVSpace,
    w: &Subspace,
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> Option<SubsetWitness> {
    let src = Sources::new(v, &witnesses.derived)?;
    if src.len() == 0 {
        return None;
    }
    let keys = src.atom_keys(None);
    let ann = w.annihilator();
    let n = v.dim;
    // one equation per (atom, functional), unknowns c_j
    let mut eqs: Vec<Vector> = Vec::new();
    for k in &keys {
        for phi in &ann {
            eqs.push((0..src.len()).map(|j| linalg::dot(phi, &src.sigs[j].vector(k, n))).collect());
        }
    }
    let basis = if eqs.is_empty() { (0..src.len()).map(|j| unit(src.len(), j)).collect() } else { linalg::nullspace(&eqs, src.len()) };
    let mut candidates = basis.clone();
    if basis.len() > 1 {
        let mut sum = vec![Rational::zero(); src.len()];
        for b in &basis {
            for (a, x) in sum.iter_mut().zip(b) {
                *a += x;
            }
        }
        candidates.push(sum);
    }
    for c in candidates {
        let exotic: Vec<crate::expr::Expr> = {
            let val = src.value(&c);
            let sig = super::signature::signature(&val)?;
            val.iter().zip(&sig.smooth).map(|(e, s)| (e.clone() - s.clone()).normalize()).collect()
        };
        for (k, e) in exotic.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            let verdict = classify_smoothness_with(e, ctx);
            if verdict.status == SmoothStatus::NonSmooth {
                let smooth_part: Vec<crate::expr::Expr> =
                    src.value(&c).iter().zip(&exotic).map(|(a, b)| (a.clone() - b.clone()).normalize()).collect();
                let plot = src
                    .plot(&c)
                    .add(&crate::diffeology::Plot::smooth(smooth_part.iter().map(|s| (-s.clone()).normalize()).collect()))
                    .ok()?;
                return Some(SubsetWitness {
                    combination: c
                        .iter()
                        .enumerate()
                        .filter(|(_, x)| !x.is_zero())
                        .map(|(j, x)| (src.labels[j].clone(), fmt_rational(x)))
                        .collect(),
                    plot: plot.to_string(),
                    value: exotic.iter().map(ToString::to_string).collect(),
                    coordinate: k + 1,
                    verdict,
                });
            }
        }
    }
    None
}

/// Standard, non-standard (with a witness plot) or unknown.
pub fn standardness(
    v: &DVSpace,
    w: &Subspace,
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> StandardnessCertificate {
    if w.dim() == 0 {
        let mut c = StandardnessCertificate::new(w, Standardness::Standard);
        c.derivation.push("the zero subspace carries only constant plots".into());
        return c;
    }
    if v.is_declared_standard() {
        let mut c = StandardnessCertificate::new(w, Standardness::Standard);
        c.derivation.push("the ambient diffeology is standard".into());
        return c;
    }
    let Some(src) = Sources::new(v, &[]) else {
        let mut c = StandardnessCertificate::new(w, Standardness::Unknown);
        c.reason = Some("some generator is not a constant combination of atoms".into());
        return c;
    };
    let cols = columns(&src.sigs);
    for rules in rule_sets(ctx) {
        let cl = close(v.dim, &cols, w, &rules);
        if cl.standard {
            let mut c = StandardnessCertificate::new(w, Standardness::Standard);
            c.derivation = cl.derivation;
            c.derivation.push("hence every coordinate of a plot in W is smooth".into());
            c.axioms_used = cl.fired.iter().map(|s| s.to_string()).collect();
            return c;
        }
    }
    if let Some(wit) = nonstandard_witness(v, w, witnesses, ctx) {
        let mut c = StandardnessCertificate::new(w, Standardness::NonStandard);
        c.axioms_used = wit.verdict.axioms_used.clone();
        c.derivation.push(format!("{} lies in W and coordinate {} is not smooth", wit.plot, wit.coordinate));
        c.witness = Some(wit);
        return c;
    }
    let mut c = StandardnessCertificate::new(w, Standardness::Unknown);
    c.reason = Some("neither a smoothness derivation nor a non-smooth plot in W was found".into());
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::numbers::int;

    fn space(dim: usize, gens: &[&[&str]]) -> DVSpace {
        let g = gens.iter().map(|g| g.iter().map(|s| parse_expr(s).unwrap()).collect()).collect();
        DVSpace::new("t", dim, g, vec![]).unwrap()
    }

    fn line(v: &[i64]) -> Subspace {
        Subspace::span(v.len(), &[v.iter().map(|&x| int(x)).collect()])
    }

    #[test]
    fn r3_subspaces() {
        let v = space(3, &[&["0", "abs(x)", "abs(x)"]]);
        let ctx = ClassifyContext::default();
        let ws = WitnessSet::empty();
        let c = standardness(&v, &Subspace::coords(3, &[1, 2]), &ws, &ctx);
        assert!(c.is_standard() && c.axioms_used.is_empty());
        assert!(standardness(&v, &Subspace::coords(3, &[3]), &ws, &ctx).is_standard());
        let c = standardness(&v, &line(&[0, 1, 1]), &ws, &ctx);
        assert_eq!(c.status, Standardness::NonStandard);
        assert_eq!(c.witness.unwrap().value, ["0", "abs(x)", "abs(x)"]);
    }

    #[test]
    fn gamma_pair_needs_axiom() {
        let v = space(2, &[&["gamma(x)", "gamma(x)"], &["0", "abs(x)"]]);
        let ws = WitnessSet::empty();
        let c = standardness(&v, &Subspace::coords(2, &[1]), &ws, &ClassifyContext::with_axioms(&["A"]));
        assert!(c.is_standard());
        assert_eq!(c.axioms_used, ["A"]);
        let c = standardness(&v, &Subspace::coords(2, &[1]), &ws, &ClassifyContext::default());
        assert_eq!(c.status, Standardness::Unknown);
    }

    #[test]
    fn coupled_generator_lines() {
        let v = space(2, &[&["abs(x)", "gamma(x)"]]);
        let ctx = ClassifyContext::with_axioms(&["A"]);
        let ws = WitnessSet::empty();
        for l in [[1, 0], [0, 1], [1, 1], [2, -3]] {
            let c = standardness(&v, &line(&l), &ws, &ctx);
            assert!(c.is_standard(), "{l:?}");
            assert_eq!(c.axioms_used, ["A"]);
        }
    }

    #[test]
    fn sqrt_delta_line() {
        let v = space(2, &[&["deltaQ(x)", "deltaQ(sqrt(abs(x)))"]]);
        let ws = WitnessSet::empty();
        let on = ClassifyContext::with_axioms(&["sqrt-implication"]);
        let c = standardness(&v, &Subspace::coords(2, &[1]), &ws, &on);
        assert!(c.is_standard());
        assert_eq!(c.axioms_used, ["sqrt-implication"]);
        let off = standardness(&v, &Subspace::coords(2, &[1]), &ws, &ClassifyContext::default());
        assert_ne!(off.status, Standardness::Standard);
    }

    #[test]
    fn v2_delta_lines_without_witnesses() {
        let v = space(2, &[&["abs(x)", "abs(x)"], &["0", "deltaQ(x)"]]);
        let ws = WitnessSet::empty();
        let ctx = ClassifyContext::default();
        // the generator p itself lies on the diagonal
        assert_eq!(standardness(&v, &line(&[1, 1]), &ws, &ctx).status, Standardness::NonStandard);
        // q lies on the e2 axis
        assert_eq!(standardness(&v, &line(&[0, 1]), &ws, &ctx).status, Standardness::NonStandard);
        // e1 needs the derived plot (|x|, 0)
        assert_eq!(standardness(&v, &line(&[1, 0]), &ws, &ctx).status, Standardness::Unknown);
    }
}
