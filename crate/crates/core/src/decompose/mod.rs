//! Smooth direct sums: certification from plot witnesses, refutation from
//! standard summands, complementedness, decomposability and `Ker + Im`.

mod reports;
mod signature;
mod standard;
mod witness;

pub use reports::{
    complementedness_report, decomposability_report, kernel_image_check, replay_matrix_witness, ComplementStatus,
    ComplementednessReport, DecomposabilityReport, DecomposabilityStatus, KerImReport, KerImStatus, MatrixWitness,
};
pub use signature::{certify_plot, family, replay_plot_certificate, signature, Family, PlotCertificate, Signature};
pub use standard::{nonstandard_witness, standardness, Standardness, StandardnessCertificate, SubsetWitness};
pub use witness::{verify_derived, DerivedCheck, DerivedPlot, LinkContext, WitnessSet};

use serde::Serialize;

use crate::diffeology::{fmt_vector, DVSpace, LinearMap, Subspace};
use crate::error::{Error, Result};
use crate::expr::{
    classify_smoothness_with, parse_expr, verify_witness, ClassifyContext, Expr, NonSmoothWitness, SmoothStatus,
    SmoothnessVerdict,
};
use crate::linalg::{self, Vector};
use crate::numbers::{int, QSqrt2};

/// `W0 + W1 = R^n` and `W0 ∩ W1 = 0`, by exact rank.
pub fn check_algebraic_sum(n: usize, w0: &Subspace, w1: &Subspace) -> bool {
    if w0.ambient != n || w1.ambient != n || w0.dim() + w1.dim() != n {
        return false;
    }
    let mut all = w0.basis.clone();
    all.extend(w1.basis.iter().cloned());
    linalg::rank(&all, n) == n
}

/// Projection onto `W0` along `W1`.
pub fn projection(w0: &Subspace, w1: &Subspace) -> Result<LinearMap> {
    let n = w0.ambient;
    if !check_algebraic_sum(n, w0, w1) {
        return Err(Error::Invalid(format!("{w0} and {w1} are not complementary in R^{n}")));
    }
    let mut basis = w0.basis.clone();
    basis.extend(w1.basis.iter().cloned());
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    for i in 0..n {
        let c = linalg::solve_combination(&basis, &crate::diffeology::unit(n, i), n)
            .ok_or_else(|| Error::Internal("complementary bases must span".into()))?;
        let mut img = vec![int(0); n];
        for (ct, b) in c.iter().zip(&w0.basis) {
            for (a, x) in img.iter_mut().zip(b) {
                *a += ct * x;
            }
        }
        cols.push(img);
    }
    let rows = (0..n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    LinearMap::new(rows, n)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum SumStatus {
    SmoothCertified,
    NonSmooth,
    Unknown,
}

/// `pi_k o g_i` is a plot of `V`.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ForwardWitness {
    pub generator: String,
    pub component: String,
    pub certificate: PlotCertificate,
}

/// Both summands are standard, so a smooth sum would make `V` standard;
/// the named generator coordinate is not smooth.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Refutation {
    pub w0: StandardnessCertificate,
    pub w1: StandardnessCertificate,
    pub generator: String,
    pub coordinate: usize,
    pub expr: String,
    pub witness: NonSmoothWitness,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct DecompositionVerdict {
    pub status: SumStatus,
    pub w0: Subspace,
    pub w1: Subspace,
    pub forward_witnesses: Vec<ForwardWitness>,
    pub backward_check: Vec<String>,
    pub derived_checks: Vec<DerivedCheck>,
    pub axioms_used: Vec<String>,
    pub reason: Option<String>,
    pub refutation: Option<Refutation>,
}

impl DecompositionVerdict {
    fn new(status: SumStatus, w0: &Subspace, w1: &Subspace) -> Self {
        DecompositionVerdict {
            status,
            w0: w0.clone(),
            w1: w1.clone(),
            forward_witnesses: vec![],
            backward_check: vec![],
            derived_checks: vec![],
            axioms_used: vec![],
            reason: None,
            refutation: None,
        }
    }
}

fn backward_text() -> Vec<String> {
    vec![
        "a plot of W0 or W1 is by definition a plot of V with values in that subspace".into(),
        "the sum of a plot of W0 and a plot of W1 is a plot of V".into(),
    ]
}

fn push_unique(list: &mut Vec<String>, items: &[String]) {
    for a in items {
        if !list.contains(a) {
            list.push(a.clone());
        }
    }
}

/// Certifies `V = W0 (+) W1` smoothly: every generator projected to either
/// summand must be a certified plot of `V`, using the generators and the
/// verified derived plots of `witnesses`.
pub fn certify_smooth_sum(
    v: &DVSpace,
    w0: &Subspace,
    w1: &Subspace,
    witnesses: &WitnessSet,
) -> Result<DecompositionVerdict> {
    let p0 = projection(w0, w1)?;
    let mut verdict = DecompositionVerdict::new(SumStatus::SmoothCertified, w0, w1);
    for (i, g) in v.generators.iter().enumerate() {
        let t0 = p0.apply_exprs(g);
        let t1: Vec<Expr> = g.iter().zip(&t0).map(|(a, b)| (a.clone() - b.clone()).normalize()).collect();
        for (name, t) in [("W0", t0), ("W1", t1)] {
            match certify_plot(v, &witnesses.derived, &t) {
                Some(certificate) => verdict.forward_witnesses.push(ForwardWitness {
                    generator: format!("g{}", i + 1),
                    component: name.into(),
                    certificate,
                }),
                None => {
                    let mut u = DecompositionVerdict::new(SumStatus::Unknown, w0, w1);
                    let shown: Vec<String> = t.iter().map(ToString::to_string).collect();
                    let mut why = format!(
                        "no certificate that the projection of g{} to {name}, ({}), is a plot of V",
                        i + 1,
                        shown.join(",")
                    );
                    for (n, e) in &witnesses.rejected {
                        why.push_str(&format!("; witness {n} failed: {e}"));
                    }
                    u.reason = Some(why);
                    return Ok(u);
                }
            }
        }
    }
    let used: Vec<&String> = verdict.forward_witnesses.iter().flat_map(|f| &f.certificate.derived_used).collect();
    verdict.derived_checks = witnesses.checks.iter().filter(|c| used.contains(&&c.name)).cloned().collect();
    verdict.backward_check = backward_text();
    if w0.dim() == v.dim || w1.dim() == v.dim {
        verdict.reason = Some("one summand is the whole space".into());
    }
    Ok(verdict)
}

/// Refutes a smooth sum of two standard summands by a non-smooth generator.
pub fn refute_smooth_sum_standard(
    v: &DVSpace,
    w0: &Subspace,
    w1: &Subspace,
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> Result<DecompositionVerdict> {
    if !check_algebraic_sum(v.dim, w0, w1) {
        return Err(Error::Invalid(format!("{w0} and {w1} are not complementary in R^{}", v.dim)));
    }
    let s0 = standardness(v, w0, witnesses, ctx);
    let s1 = standardness(v, w1, witnesses, ctx);
    if !(s0.is_standard() && s1.is_standard()) {
        let mut u = DecompositionVerdict::new(SumStatus::Unknown, w0, w1);
        let which: Vec<String> = [(&s0, "W0"), (&s1, "W1")]
            .iter()
            .filter(|(s, _)| !s.is_standard())
            .map(|(s, n)| format!("{n} is {:?}", s.status))
            .collect();
        u.reason = Some(format!("refutation needs standard summands: {}", which.join(", ")));
        return Ok(u);
    }
    for (i, g) in v.generators.iter().enumerate() {
        for (k, e) in g.iter().enumerate() {
            let verdict = classify_smoothness_with(e, ctx);
            if let (SmoothStatus::NonSmooth, Some(w)) = (verdict.status, verdict.witness.clone()) {
                let mut r = DecompositionVerdict::new(SumStatus::NonSmooth, w0, w1);
                push_unique(&mut r.axioms_used, &s0.axioms_used);
                push_unique(&mut r.axioms_used, &s1.axioms_used);
                push_unique(&mut r.axioms_used, &verdict.axioms_used);
                r.reason = Some(format!(
                    "W0 and W1 are standard, so a smooth sum would make V standard, but coordinate {} of g{} is not smooth",
                    k + 1,
                    i + 1
                ));
                r.refutation =
                    Some(Refutation { w0: s0, w1: s1, generator: format!("g{}", i + 1), coordinate: k + 1, expr: e.to_string(), witness: w });
                return Ok(r);
            }
        }
    }
    let mut u = DecompositionVerdict::new(SumStatus::Unknown, w0, w1);
    u.reason = Some("both summands are standard but no generator was shown non-smooth".into());
    Ok(u)
}

/// Certification first, then refutation.
pub fn check_sum(
    v: &DVSpace,
    w0: &Subspace,
    w1: &Subspace,
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> Result<DecompositionVerdict> {
    let c = certify_smooth_sum(v, w0, w1, witnesses)?;
    if c.status == SumStatus::SmoothCertified {
        return Ok(c);
    }
    let r = refute_smooth_sum_standard(v, w0, w1, witnesses, ctx)?;
    if r.status == SumStatus::NonSmooth {
        return Ok(r);
    }
    let mut u = c;
    u.reason = Some(format!("{}; {}", u.reason.unwrap_or_default(), r.reason.unwrap_or_default()));
    Ok(u)
}

/// Re-checks a verdict from its stored certificates. Derived plots named in
/// the certificates are looked up in `witnesses` and verified again.
pub fn replay_verdict(
    v: &DVSpace,
    verdict: &DecompositionVerdict,
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> Result<()> {
    match verdict.status {
        SumStatus::Unknown => Ok(()),
        SumStatus::SmoothCertified => {
            let p0 = projection(&verdict.w0, &verdict.w1)?;
            if verdict.forward_witnesses.len() != 2 * v.generators.len() {
                return Err(Error::Verification("forward witnesses do not cover every generator".into()));
            }
            for (idx, fw) in verdict.forward_witnesses.iter().enumerate() {
                let g = &v.generators[idx / 2];
                let t0 = p0.apply_exprs(g);
                let want: Vec<Expr> = if idx % 2 == 0 {
                    t0
                } else {
                    g.iter().zip(&t0).map(|(a, b)| (a.clone() - b.clone()).normalize()).collect()
                };
                let stored: Vec<Expr> = fw.certificate.target.iter().map(|s| parse_expr(s)).collect::<Result<_>>()?;
                if stored.iter().zip(&want).any(|(a, b)| !(a.clone() - b.clone()).normalize().is_zero()) {
                    return Err(Error::Verification(format!("stored projection of {} is wrong", fw.generator)));
                }
                replay_plot_certificate(v, &witnesses.derived, &fw.certificate)?;
                for name in &fw.certificate.derived_used {
                    let d = witnesses
                        .derived
                        .iter()
                        .find(|d| &d.name == name)
                        .ok_or_else(|| Error::Verification(format!("derived plot {name} is missing")))?;
                    verify_derived(v, d, witnesses.context.as_ref())?;
                }
            }
            Ok(())
        }
        SumStatus::NonSmooth => {
            let r = verdict
                .refutation
                .as_ref()
                .ok_or_else(|| Error::Verification("NonSmooth verdict without refutation".into()))?;
            for w in [&verdict.w0, &verdict.w1] {
                if !standardness(v, w, witnesses, ctx).is_standard() {
                    return Err(Error::Verification(format!("{w} is not certified standard")));
                }
            }
            let e = parse_expr(&r.expr)?;
            let i: usize = r.generator.trim_start_matches('g').parse().map_err(|_| Error::Verification("bad generator label".into()))?;
            if v.generators.get(i - 1).and_then(|g| g.get(r.coordinate - 1)) != Some(&e) {
                return Err(Error::Verification("refutation names a different generator coordinate".into()));
            }
            verify_witness(&e, &r.witness, ctx)
        }
    }
}

/// Witness that `Span(u)` is not standard: the plot `x -> |x|*u`.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct LineWitness {
    pub direction: String,
    pub status: Standardness,
    pub plot: Option<PlotCertificate>,
    pub membership: Vec<String>,
    pub derived_checks: Vec<DerivedCheck>,
    pub coordinate: Option<usize>,
    pub verdict: Option<SmoothnessVerdict>,
    pub axioms_used: Vec<String>,
}

fn abs_times(u: &[crate::numbers::Rational]) -> Vec<Expr> {
    u.iter()
        .map(|c| (Expr::constant(QSqrt2::from_rational(c.clone())) * Expr::abs(Expr::x())).normalize())
        .collect()
}

/// Builds `x -> |x|*u` from generators and derived plots and classifies it.
pub fn nonstandard_subspace_witness(
    v: &DVSpace,
    u: &[crate::numbers::Rational],
    witnesses: &WitnessSet,
    ctx: &ClassifyContext,
) -> Result<LineWitness> {
    if u.len() != v.dim {
        return Err(Error::Shape(format!("direction has {} entries, space has dimension {}", u.len(), v.dim)));
    }
    if linalg::is_zero_vector(u) {
        return Err(Error::Invalid("the zero vector spans the zero subspace".into()));
    }
    let mut out = LineWitness {
        direction: fmt_vector(u),
        status: Standardness::Unknown,
        plot: None,
        membership: vec![],
        derived_checks: vec![],
        coordinate: None,
        verdict: None,
        axioms_used: vec![],
    };
    let target = abs_times(u);
    let Some(cert) = certify_plot(v, &witnesses.derived, &target) else {
        out.membership.push("no derivation of x -> |x|*u from the generators and derived plots".into());
        return Ok(out);
    };
    out.derived_checks = witnesses.checks.iter().filter(|c| cert.derived_used.contains(&c.name)).cloned().collect();
    out.membership.push(format!("x -> |x|*{} equals {} and is a plot of V", fmt_vector(u), cert.plot));
    let w = Subspace::span(v.dim, &[u.to_vec()]);
    for phi in w.annihilator() {
        if !num_traits::Zero::is_zero(&linalg::dot(&phi, u)) {
            return Err(Error::Internal("annihilator does not vanish on its subspace".into()));
        }
        out.membership.push(format!("{} applied to |x|*u is |x|*0 = 0", fmt_vector(&phi)));
    }
    out.plot = Some(cert);
    let k = u.iter().position(|c| !num_traits::Zero::is_zero(c)).expect("u is nonzero");
    let verdict = classify_smoothness_with(&target[k], ctx);
    if verdict.status == SmoothStatus::NonSmooth {
        out.status = Standardness::NonStandard;
        out.axioms_used = verdict.axioms_used.clone();
    }
    out.coordinate = Some(k + 1);
    out.verdict = Some(verdict);
    Ok(out)
}

/// Replays a line witness: plot certificate, derived plots, membership in
/// `Span(u)` and the non-smoothness witness.
pub fn replay_line_witness(v: &DVSpace, lw: &LineWitness, witnesses: &WitnessSet, ctx: &ClassifyContext) -> Result<()> {
    let u = crate::diffeology::parse_vector(&lw.direction)?;
    let cert = lw.plot.as_ref().ok_or_else(|| Error::Verification("no plot stored".into()))?;
    let target = abs_times(&u);
    let stored: Vec<Expr> = cert.target.iter().map(|s| parse_expr(s)).collect::<Result<_>>()?;
    if stored != target {
        return Err(Error::Verification("stored plot is not |x|*u".into()));
    }
    replay_plot_certificate(v, &witnesses.derived, cert)?;
    for name in &cert.derived_used {
        let d = witnesses
            .derived
            .iter()
            .find(|d| &d.name == name)
            .ok_or_else(|| Error::Verification(format!("derived plot {name} is missing")))?;
        verify_derived(v, d, witnesses.context.as_ref())?;
    }
    let w = Subspace::span(v.dim, std::slice::from_ref(&u));
    if w.annihilator().iter().any(|phi| !num_traits::Zero::is_zero(&linalg::dot(phi, &u))) {
        return Err(Error::Verification("plot leaves Span(u)".into()));
    }
    let k = lw.coordinate.ok_or_else(|| Error::Verification("no coordinate".into()))?;
    let w = lw
        .verdict
        .as_ref()
        .and_then(|v| v.witness.as_ref())
        .ok_or_else(|| Error::Verification("no non-smoothness witness".into()))?;
    verify_witness(&target[k - 1], w, ctx)
}
