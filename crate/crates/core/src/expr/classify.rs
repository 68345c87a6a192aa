use serde::{Deserialize, Serialize};

use super::combination::{decompose, AtomKind, Combination};
use super::diff::{differentiate, jet};
use super::eval::{eval_at, EvalContext};
use super::rewrite::{rewrite_delta_cancellation, RationalityLink, Region};
use super::{Expr, Func};
use crate::error::{Error, Result};
use crate::numbers::{rat, QSqrt2};

/// Axiom: `gamma` is not smooth, and every map lying both in the diffeology
/// generated by `gamma` and in the one generated by `abs` is smooth.
pub const AXIOM_GAMMA: &str = "A";
/// Optional axiom: smoothness of `sum h_i*deltaQ(sqrt(abs(H_i)))` forces the
/// same for `sum h_i*deltaQ(H_i)`.
pub const AXIOM_SQRT_IMPLICATION: &str = "sqrt-implication";

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum SmoothStatus {
    Smooth,
    NonSmooth,
    Unknown,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonSmoothWitness {
    /// One-sided derivatives at `point` differ.
    DerivativeJump { point: String, left: String, right: String },
    /// On `x <= 0` and `x > 0` the expression rewrites to the two branches,
    /// whose derivatives of the given order differ at 0.
    PiecewiseJump { order: u32, left_branch: String, right_branch: String, left: String, right: String },
    /// Along `rational_side -> point` and `other_side -> point` every
    /// `deltaQ` atom is constant; the limits of the expression differ by
    /// `jump` while the rest is continuous.
    DensityJump {
        point: String,
        rational_side: Vec<String>,
        other_side: Vec<String>,
        atoms: Vec<DensityAtom>,
        jump: String,
    },
    /// A combination `c*gamma(x) + d*abs(x)` with `(c, d) != 0`, non-smooth by axiom.
    AxiomFact { axiom: String, statement: String },
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct DensityAtom {
    pub atom: String,
    pub coeff_at_point: String,
    pub on_rational_side: u8,
    pub on_other_side: u8,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SmoothnessVerdict {
    pub status: SmoothStatus,
    pub witness: Option<NonSmoothWitness>,
    pub derivation: Vec<String>,
    pub axioms_used: Vec<String>,
    pub reason: Option<String>,
}

impl SmoothnessVerdict {
    fn smooth(derivation: Vec<String>) -> Self {
        SmoothnessVerdict { status: SmoothStatus::Smooth, witness: None, derivation, axioms_used: vec![], reason: None }
    }

    fn non_smooth(w: NonSmoothWitness, axioms_used: Vec<String>) -> Self {
        SmoothnessVerdict { status: SmoothStatus::NonSmooth, witness: Some(w), derivation: vec![], axioms_used, reason: None }
    }

    fn unknown(reason: impl Into<String>) -> Self {
        SmoothnessVerdict {
            status: SmoothStatus::Unknown,
            witness: None,
            derivation: vec![],
            axioms_used: vec![],
            reason: Some(reason.into()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ClassifyContext {
    pub axioms: Vec<String>,
    pub link: Option<RationalityLink>,
    pub eval: EvalContext,
}

impl ClassifyContext {
    pub fn with_axioms(axioms: &[&str]) -> Self {
        ClassifyContext { axioms: axioms.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn has_axiom(&self, name: &str) -> bool {
        self.axioms.iter().any(|a| a == name)
    }
}

pub fn classify_smoothness(e: &Expr) -> SmoothnessVerdict {
    classify_smoothness_with(e, &ClassifyContext::default())
}

pub fn classify_smoothness_with(e: &Expr, ctx: &ClassifyContext) -> SmoothnessVerdict {
    let s = e.simplify();
    if !s.contains_nonsmooth() {
        return match smooth_fragment(&s) {
            Ok(steps) => SmoothnessVerdict::smooth(steps),
            Err(why) => SmoothnessVerdict::unknown(why),
        };
    }
    if let Some(link) = &ctx.link {
        if link.covers(Region::All) && s.contains_func(&Func::DeltaQ) {
            if let Some(v) = classify_piecewise(&s, link) {
                return v;
            }
        }
    }
    let Some(comb) = decompose(&s) else {
        return SmoothnessVerdict::unknown("not a linear combination of single exotic atoms");
    };
    if comb.atoms.is_empty() {
        return match smooth_fragment(&comb.smooth) {
            Ok(mut steps) => {
                steps.insert(0, "exotic terms cancel after collecting like terms".into());
                SmoothnessVerdict::smooth(steps)
            }
            Err(why) => SmoothnessVerdict::unknown(why),
        };
    }
    if let Err(why) = smooth_fragment(&comb.smooth) {
        return SmoothnessVerdict::unknown(why);
    }
    let has = |k: fn(&AtomKind) -> bool| comb.atoms.iter().any(|(_, a)| k(&a.kind));
    let has_axiom = has(|k| matches!(k, AtomKind::Axiom(_)));
    let has_delta = has(|k| *k == AtomKind::DeltaQ);
    if has_axiom {
        return axiom_fact(&comb, ctx)
            .unwrap_or_else(|| SmoothnessVerdict::unknown("axiom functions are only decided by axiom facts"));
    }
    if has_delta {
        if let Some(w) = density_witness(&comb) {
            return SmoothnessVerdict::non_smooth(w, vec![]);
        }
        return SmoothnessVerdict::unknown("no density witness found for the deltaQ terms");
    }
    if let Some(w) = derivative_witness(&s, &comb) {
        return SmoothnessVerdict::non_smooth(w, vec![]);
    }
    SmoothnessVerdict::unknown("no derivative jump found for the abs terms")
}

/// Checks that an expression free of exotic primitives is smooth on all of
/// the real line; returns the derivation or the reason it could not be shown.
fn smooth_fragment(e: &Expr) -> std::result::Result<Vec<String>, String> {
    let mut steps = vec!["built from smooth primitives".to_string()];
    check_fragment(e, &mut steps)?;
    steps.dedup();
    Ok(steps)
}

fn check_fragment(e: &Expr, steps: &mut Vec<String>) -> std::result::Result<(), String> {
    match e {
        Expr::Const(_) | Expr::Var(_) => Ok(()),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            check_fragment(a, steps)?;
            check_fragment(b, steps)
        }
        Expr::Neg(a) | Expr::Pow(a, _) => check_fragment(a, steps),
        Expr::Call(f, a) => {
            match f {
                Func::Exp | Func::W => {}
                Func::H1 => steps.push("H1 is smooth (flat at 0)".into()),
                Func::Sqrt if a.as_const().is_some_and(QSqrt2::is_positive) => {}
                Func::Inv if a.as_const().is_some_and(|c| !c.is_zero()) => {}
                Func::Sqrt | Func::Inv => return Err(format!("{} of a non-constant argument", f.name())),
                Func::BarGamma => match &**a {
                    Expr::Call(Func::H1, _) => {
                        steps.push("barGamma is analytic on [0,1), which contains the range of H1".into())
                    }
                    other if other.as_const().is_some_and(|c| !c.is_negative() && *c < QSqrt2::one()) => {}
                    _ => return Err("barGamma outside the range of H1".into()),
                },
                Func::Abs | Func::DeltaQ | Func::Axiom(_) => {
                    return Err(format!("{} is not smooth", f.name()))
                }
            }
            check_fragment(a, steps)
        }
    }
}

const PIECEWISE_ORDER: u32 = 8;

/// Splits into the branches `x <= 0` and `x > 0` via the link and compares
/// the branches at 0.
fn classify_piecewise(e: &Expr, link: &RationalityLink) -> Option<SmoothnessVerdict> {
    let (left, right) = branches(e, link).ok()?;
    if left.contains_nonsmooth() || right.contains_nonsmooth() {
        return None;
    }
    if left == right && smooth_fragment(&left).is_ok() {
        return Some(SmoothnessVerdict::smooth(vec![
            format!("deltaQ terms cancel on both half-lines via the link {} ~ {}", link.a, link.b),
            format!("both branches equal {left}"),
        ]));
    }
    let ctx = EvalContext::default();
    let (mut l, mut r) = (left.clone(), right.clone());
    for order in 0..=PIECEWISE_ORDER {
        let lv = eval_at(&l, &QSqrt2::zero(), &ctx).ok()?.exact()?.clone();
        let rv = eval_at(&r, &QSqrt2::zero(), &ctx).ok()?.exact()?.clone();
        if lv != rv {
            let w = NonSmoothWitness::PiecewiseJump {
                order,
                left_branch: left.to_string(),
                right_branch: right.to_string(),
                left: lv.to_string(),
                right: rv.to_string(),
            };
            return Some(SmoothnessVerdict::non_smooth(w, vec![]));
        }
        l = differentiate(&l).ok()?;
        r = differentiate(&r).ok()?;
    }
    None
}

fn branches(e: &Expr, link: &RationalityLink) -> Result<(Expr, Expr)> {
    Ok((
        rewrite_delta_cancellation(e, Some(link), Region::NonPositive)?,
        rewrite_delta_cancellation(e, Some(link), Region::Positive)?,
    ))
}

/// Candidate kink locations: 0 and the roots of linear atom arguments.
fn kink_candidates(comb: &Combination) -> Vec<QSqrt2> {
    let mut pts = vec![QSqrt2::zero()];
    for (_, a) in &comb.atoms {
        if let Some(p) = a.inner.as_polynomial() {
            if p.len() == 2 && !p[1].is_zero() {
                let root = (-p[0].clone()).checked_div(&p[1]).expect("nonzero");
                if !pts.contains(&root) {
                    pts.push(root);
                }
            }
        }
    }
    pts
}

fn derivative_witness(e: &Expr, comb: &Combination) -> Option<NonSmoothWitness> {
    for p in kink_candidates(comb) {
        if let Ok(j) = jet(e, &p) {
            if j.dl != j.dr {
                return Some(NonSmoothWitness::DerivativeJump {
                    point: p.to_string(),
                    left: j.dl.to_string(),
                    right: j.dr.to_string(),
                });
            }
        }
    }
    None
}

const DENSITY_SAMPLES: i64 = 8;

/// Sequence pairs converging to a point: `(p + 1/k, p + sqrt2/k)` and, at 0,
/// `(1/k^2, 2/k^2)` (rational points with rational vs irrational roots).
fn density_sequences() -> Vec<(QSqrt2, Vec<QSqrt2>, Vec<QSqrt2>)> {
    let mut out = Vec::new();
    for p in [rat(0, 1), rat(1, 1), rat(-1, 1), rat(1, 2)] {
        let p = QSqrt2::from_rational(p);
        let r = (1..=DENSITY_SAMPLES).map(|k| &p + &QSqrt2::from_rational(rat(1, k))).collect();
        let s = (1..=DENSITY_SAMPLES).map(|k| &p + &QSqrt2::new(rat(0, 1), rat(1, k))).collect();
        out.push((p, r, s));
    }
    let r = (1..=DENSITY_SAMPLES).map(|k| QSqrt2::from_rational(rat(1, k * k))).collect();
    let s = (1..=DENSITY_SAMPLES).map(|k| QSqrt2::from_rational(rat(2, k * k))).collect();
    out.push((QSqrt2::zero(), r, s));
    out
}

/// Constant value of `deltaQ(inner)` along a sequence, if determinate.
fn constant_delta(inner: &Expr, seq: &[QSqrt2]) -> Option<u8> {
    let atom = Expr::delta_q(inner.clone());
    let ctx = EvalContext::default();
    let mut val = None;
    for x in seq {
        let v = eval_at(&atom, x, &ctx).ok()?.exact()?.is_zero();
        let v = if v { 0 } else { 1 };
        if *val.get_or_insert(v) != v {
            return None;
        }
    }
    val
}

fn density_witness(comb: &Combination) -> Option<NonSmoothWitness> {
    let ctx = EvalContext::default();
    for (p, r, s) in density_sequences() {
        let mut atoms = Vec::new();
        let mut jump = QSqrt2::zero();
        let mut ok = true;
        for (h, a) in comb.atoms.iter().filter(|(_, a)| a.kind == AtomKind::DeltaQ) {
            let (Some(dr), Some(ds), Some(hp)) = (
                constant_delta(&a.inner, &r),
                constant_delta(&a.inner, &s),
                eval_at(h, &p, &ctx).ok().and_then(|v| v.exact().cloned()),
            ) else {
                ok = false;
                break;
            };
            jump = &jump + &(&hp * &QSqrt2::from_int(dr as i64 - ds as i64));
            atoms.push(DensityAtom {
                atom: a.to_expr().to_string(),
                coeff_at_point: hp.to_string(),
                on_rational_side: dr,
                on_other_side: ds,
            });
        }
        if ok && !jump.is_zero() {
            return Some(NonSmoothWitness::DensityJump {
                point: p.to_string(),
                rational_side: r.iter().map(ToString::to_string).collect(),
                other_side: s.iter().map(ToString::to_string).collect(),
                atoms,
                jump: jump.to_string(),
            });
        }
    }
    None
}

fn axiom_fact(comb: &Combination, ctx: &ClassifyContext) -> Option<SmoothnessVerdict> {
    if !ctx.has_axiom(AXIOM_GAMMA) || !axiom_pattern(comb) {
        return None;
    }
    Some(SmoothnessVerdict::non_smooth(
        NonSmoothWitness::AxiomFact {
            axiom: AXIOM_GAMMA.into(),
            statement: "c*gamma(x) + d*abs(x) is smooth only for c = d = 0".into(),
        },
        vec![AXIOM_GAMMA.into()],
    ))
}

/// `c*gamma(x) + d*abs(x)` with constant coefficients and at least one gamma term.
fn axiom_pattern(comb: &Combination) -> bool {
    comb.atoms.iter().all(|(h, a)| {
        h.as_const().is_some()
            && a.inner == Expr::x()
            && match &a.kind {
                AtomKind::Axiom(n) => n == "gamma",
                AtomKind::Abs => true,
                AtomKind::DeltaQ => false,
            }
    }) && comb.atoms.iter().any(|(_, a)| matches!(a.kind, AtomKind::Axiom(_)))
}

/// Replays a non-smoothness witness against the expression.
pub fn verify_witness(e: &Expr, w: &NonSmoothWitness, ctx: &ClassifyContext) -> Result<()> {
    let fail = |m: String| Err(Error::Verification(m));
    let s = e.simplify();
    match w {
        NonSmoothWitness::DerivativeJump { point, left, right } => {
            let j = jet(&s, &point.parse()?)?;
            if j.dl.to_string() != *left || j.dr.to_string() != *right || j.dl == j.dr {
                return fail(format!("one-sided derivatives at {point} are {} and {}", j.dl, j.dr));
            }
        }
        NonSmoothWitness::PiecewiseJump { order, left_branch, right_branch, left, right } => {
            let link = ctx.link.as_ref().ok_or_else(|| Error::Verification("piecewise witness needs a link".into()))?;
            let (mut l, mut r) = branches(&s, link)?;
            if l.to_string() != *left_branch || r.to_string() != *right_branch {
                return fail("branches do not replay".into());
            }
            for _ in 0..*order {
                l = differentiate(&l)?;
                r = differentiate(&r)?;
            }
            let ectx = EvalContext::default();
            let lv = eval_at(&l, &QSqrt2::zero(), &ectx)?.exact().cloned();
            let rv = eval_at(&r, &QSqrt2::zero(), &ectx)?.exact().cloned();
            match (lv, rv) {
                (Some(a), Some(b)) if a != b && a.to_string() == *left && b.to_string() == *right => {}
                _ => return fail("branch derivatives do not replay".into()),
            }
        }
        NonSmoothWitness::DensityJump { point, rational_side, other_side, atoms, jump } => {
            let comb = decompose(&s).ok_or_else(|| Error::Verification("not a combination".into()))?;
            let p: QSqrt2 = point.parse()?;
            let parse_all = |v: &[String]| v.iter().map(|x| x.parse()).collect::<Result<Vec<QSqrt2>>>();
            let (r, o) = (parse_all(rational_side)?, parse_all(other_side)?);
            if r.iter().chain(&o).any(|x| *x == p) {
                return fail("sequences must avoid the limit point".into());
            }
            let deltas: Vec<_> = comb.atoms.iter().filter(|(_, a)| a.kind == AtomKind::DeltaQ).collect();
            if deltas.len() != atoms.len() {
                return fail("atom list does not match the expression".into());
            }
            let mut total = QSqrt2::zero();
            for ((h, a), rec) in deltas.iter().zip(atoms) {
                let hp = eval_at(h, &p, &EvalContext::default())?.exact().cloned();
                let (dr, ds) = (constant_delta(&a.inner, &r), constant_delta(&a.inner, &o));
                if a.to_expr().to_string() != rec.atom
                    || dr != Some(rec.on_rational_side)
                    || ds != Some(rec.on_other_side)
                    || hp.as_ref().map(ToString::to_string) != Some(rec.coeff_at_point.clone())
                {
                    return fail(format!("atom {} does not replay", rec.atom));
                }
                total = &total + &(&hp.unwrap() * &QSqrt2::from_int(rec.on_rational_side as i64 - rec.on_other_side as i64));
            }
            if total.is_zero() || total.to_string() != *jump {
                return fail("jump does not replay".into());
            }
        }
        NonSmoothWitness::AxiomFact { axiom, .. } => {
            let comb = decompose(&s).ok_or_else(|| Error::Verification("not a combination".into()))?;
            if !ctx.has_axiom(axiom) || axiom != AXIOM_GAMMA || !axiom_pattern(&comb) {
                return fail(format!("axiom {axiom} does not apply"));
            }
        }
    }
    Ok(())
}
