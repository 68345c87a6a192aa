use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::FranklinMap;
use crate::error::{Error, Result};
use crate::expr::{
    classify_smoothness, eval_tagged, parse_expr, w_exact, BarGammaOracle, EvalContext, Expr, LinkSample,
    RationalityLink, Region, SmoothStatus,
};
use crate::numbers::{fmt_rational, rat, QSqrt2, Rational, Tag, TaggedReal};

pub fn build_h1() -> Expr {
    Expr::h1(Expr::x())
}

/// `barGamma(H1(x))` together with the evaluation context binding
/// `barGamma` to `w o f` (and `1/sqrt2` at 0).
pub fn build_h2(f: &Arc<FranklinMap>) -> (Expr, EvalContext) {
    (Expr::bar_gamma(build_h1()), EvalContext::with_bar_gamma(Arc::new(Oracle(f.clone()))))
}

#[derive(Debug)]
struct Oracle(Arc<FranklinMap>);

impl BarGammaOracle for Oracle {
    fn eval_bar_gamma(&self, t: &TaggedReal) -> Result<TaggedReal> {
        let v = t.to_f64();
        if t.is_exact_zero() {
            return Ok(TaggedReal::exact(QSqrt2::inv_sqrt2()));
        }
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Domain(format!("barGamma is defined on [0,1), got {v}")));
        }
        if let Some(a) = t.as_exact().and_then(QSqrt2::as_rational) {
            if let Some(q) = self.0.matched_value(a) {
                return Ok(TaggedReal::rational(q.clone()));
            }
        }
        let approx = w_exact(&QSqrt2::zero()).to_f64() + crate::expr::w_slope().to_f64() * self.0.eval_f64(v);
        // a nonconstant polynomial with algebraic coefficients maps
        // transcendental numbers to transcendental numbers
        if t.is_transcendental() {
            Ok(TaggedReal::transcendental(approx))
        } else {
            Ok(TaggedReal::approx(approx))
        }
    }
}

/// A certification point: an exact real, or the positive preimage under
/// `H1` of a matched source `a` (not representable exactly).
#[derive(Clone, PartialEq, Debug)]
pub enum SamplePoint {
    Exact(QSqrt2),
    MatchedPreimage(Rational),
}

impl fmt::Display for SamplePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplePoint::Exact(x) => write!(f, "{x}"),
            SamplePoint::MatchedPreimage(a) => write!(f, "H1^-1({})", fmt_rational(a)),
        }
    }
}

/// `rationals:N,matched:N,negatives:N,seed:S`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Grid {
    pub rationals: usize,
    pub matched: usize,
    pub negatives: usize,
    pub seed: u64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { rationals: 1000, matched: 16, negatives: 100, seed: 0 }
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Grid> {
        let mut g = Grid::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once(':').ok_or_else(|| Error::Invalid(format!("grid entry `{part}` is not key:value")))?;
            let n: u64 = v.trim().parse().map_err(|_| Error::Invalid(format!("grid value `{v}` is not a count")))?;
            match k.trim() {
                "rationals" => g.rationals = n as usize,
                "matched" => g.matched = n as usize,
                "negatives" => g.negatives = n as usize,
                "seed" => g.seed = n,
                other => return Err(Error::Invalid(format!("unknown grid key `{other}`"))),
            }
        }
        Ok(g)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rationals:{},matched:{},negatives:{},seed:{}", self.rationals, self.matched, self.negatives, self.seed)
    }
}

impl Grid {
    /// Nonpositive points (starting with 0), positive rationals in `(0,3]`,
    /// then matched preimages, all from a seeded generator.
    pub fn points(&self, f: &FranklinMap) -> Vec<SamplePoint> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        for k in 0..self.negatives {
            let x = if k == 0 { Rational::zero() } else { -random_rational(&mut rng) };
            out.push(SamplePoint::Exact(QSqrt2::from_rational(x)));
        }
        for _ in 0..self.rationals {
            out.push(SamplePoint::Exact(QSqrt2::from_rational(random_rational(&mut rng))));
        }
        for p in f.pairs.iter().take(self.matched) {
            out.push(SamplePoint::MatchedPreimage(p.a.clone()));
        }
        out
    }
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    let q: i64 = rng.gen_range(1..=1000);
    let p: i64 = rng.gen_range(1..=3 * q);
    rat(p, q)
}

fn tags(f: &FranklinMap, x: &SamplePoint, ctx: &EvalContext) -> std::result::Result<(Tag, Tag, String), String> {
    match x {
        SamplePoint::MatchedPreimage(a) => match f.matched_value(a) {
            Some(q) => Ok((Tag::Rational, Tag::Rational, format!("H1 = {}, H2 = w(f(H1)) = {}", fmt_rational(a), fmt_rational(q)))),
            None => Err(format!("{} is not a matched source", fmt_rational(a))),
        },
        SamplePoint::Exact(x) if !x.is_positive() => {
            Ok((Tag::Rational, Tag::Irrational, "x <= 0: H1 = 0, H2 = 1/sqrt2".into()))
        }
        SamplePoint::Exact(x) if !x.is_rational() => Err(format!("H1({x}) is outside the transcendence table")),
        SamplePoint::Exact(x) => {
            let pt = [TaggedReal::exact(x.clone())];
            let a = eval_tagged(&build_h1(), &pt, ctx).map_err(|e| e.to_string())?;
            let b = eval_tagged(&Expr::bar_gamma(build_h1()), &pt, ctx).map_err(|e| e.to_string())?;
            match (a.value(), b.value()) {
                (Some(a), Some(b)) if a.tag() != Tag::Unknown && b.tag() != Tag::Unknown => Ok((
                    a.tag(),
                    b.tag(),
                    "H1(x) = exp(-1/x^2) is transcendental; f has algebraic coefficients, so H2 is transcendental".into(),
                )),
                _ => Err(format!("tags at {x} are not decided")),
            }
        }
    }
}

/// Certifies `H1(x) ∈ Q <=> H2(x) ∈ Q` for `x > 0` and the constant values
/// for `x <= 0` at every grid point; undecided points are excluded.
pub fn certify_rationality_link(f: &Arc<FranklinMap>, grid: &Grid) -> RationalityLink {
    let (h2, ctx) = build_h2(f);
    let mut samples = Vec::new();
    let mut excluded = Vec::new();
    for x in grid.points(f) {
        match tags(f, &x, &ctx) {
            Ok((ta, tb, reason)) => {
                let positive = !matches!(&x, SamplePoint::Exact(v) if !v.is_positive());
                if positive && ta != tb {
                    excluded.push(format!("{x}: tags disagree"));
                    continue;
                }
                samples.push(LinkSample { x: x.to_string(), tag_a: ta, tag_b: tb, reason });
            }
            Err(why) => excluded.push(format!("{x}: {why}")),
        }
    }
    RationalityLink {
        a: build_h1().to_string(),
        b: h2.to_string(),
        regions: vec![Region::NonPositive, Region::Positive],
        scope: format!(
            "f truncated at order {} with {} matched pairs; x > 0 covers rational x and matched preimages",
            f.order,
            f.pairs.len()
        ),
        samples,
        excluded,
    }
}

/// `2x*deltaQ(H1(x)) - 2x*deltaQ(H2(x)) + x`.
pub fn identity_expr() -> Expr {
    parse_expr("2*x*deltaQ(H1(x))-2*x*deltaQ(barGamma(H1(x)))+x").expect("fixed text parses")
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct IdentityReport {
    pub grid: String,
    pub checked: usize,
    pub nonpositive: usize,
    pub positive_rational: usize,
    pub matched: usize,
    pub derivations: Vec<String>,
}

/// Delta values implied by link tags.
fn delta(t: Tag) -> Option<i64> {
    match t {
        Tag::Rational => Some(0),
        Tag::Irrational => Some(1),
        Tag::Unknown => None,
    }
}

/// Checks that `e` equals `positive` on `x > 0` and `nonpositive` on
/// `x <= 0` at every grid point. Exact points are evaluated fully; at matched
/// preimages the `deltaQ` atoms are replaced by the values the link assigns
/// and the difference must vanish identically.
pub fn verify_branches(
    e: &Expr,
    positive: &Expr,
    nonpositive: &Expr,
    f: &Arc<FranklinMap>,
    grid: &Grid,
) -> Result<IdentityReport> {
    let (_, ctx) = build_h2(f);
    let mut rep = IdentityReport {
        grid: grid.to_string(),
        checked: 0,
        nonpositive: 0,
        positive_rational: 0,
        matched: 0,
        derivations: vec![
            "x <= 0: H1 = 0 and H2 = 1/sqrt2, so deltaQ(H1) = 0 and deltaQ(H2) = 1".into(),
            "x > 0: H1 and H2 are rational together, so deltaQ(H1) = deltaQ(H2)".into(),
        ],
    };
    let d1 = Expr::delta_q(build_h1());
    let d2 = Expr::delta_q(Expr::bar_gamma(build_h1()));
    for x in grid.points(f) {
        let (ta, tb, _) = tags(f, &x, &ctx).map_err(|w| Error::Verification(format!("{x} is outside the link: {w}")))?;
        match &x {
            SamplePoint::Exact(v) => {
                let pt = [TaggedReal::exact(v.clone())];
                let want_e = if v.is_positive() { positive } else { nonpositive };
                let lhs = eval_tagged(e, &pt, &ctx)?;
                let want = eval_tagged(want_e, &pt, &ctx)?;
                let (Some(l), Some(w)) = (lhs.exact(), want.exact()) else {
                    return Err(Error::Verification(format!("value at {x} is not exact")));
                };
                if l != w {
                    return Err(Error::Verification(format!("at {x}: got {l}, expected {w}")));
                }
                if v.is_positive() {
                    rep.positive_rational += 1;
                } else {
                    rep.nonpositive += 1;
                }
            }
            SamplePoint::MatchedPreimage(_) => {
                let (Some(da), Some(db)) = (delta(ta), delta(tb)) else {
                    return Err(Error::Verification(format!("at {x}: deltaQ values undecided")));
                };
                // matched preimages are positive, so abs(x) = x there
                let sub = e
                    .replace(&d1, &Expr::int(da))
                    .replace(&d2, &Expr::int(db))
                    .replace(&Expr::abs(Expr::x()), &Expr::x());
                if !(sub - positive.replace(&Expr::abs(Expr::x()), &Expr::x())).normalize().is_zero() {
                    return Err(Error::Verification(format!("at {x}: deltaQ terms do not reduce to the positive branch")));
                }
                rep.matched += 1;
            }
        }
        rep.checked += 1;
    }
    Ok(rep)
}

/// Exact check of `|x| = 2x*deltaQ(H1(x)) - 2x*deltaQ(H2(x)) + x` on the grid.
pub fn verify_abs_identity(f: &Arc<FranklinMap>, link: &RationalityLink, grid: &Grid) -> Result<IdentityReport> {
    if !(link.covers(Region::NonPositive) && link.covers(Region::Positive)) {
        return Err(Error::RegionNotCovered("identity needs both half-lines".into()));
    }
    let mut rep = verify_branches(&identity_expr(), &Expr::x(), &(-Expr::x()).simplify(), f, grid)?;
    rep.derivations.push("hence the sum is x for x > 0 and -x for x <= 0, i.e. |x|".into());
    Ok(rep)
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct BranchCheck {
    pub expr: String,
    pub positive_branch: String,
    pub nonpositive_branch: String,
    pub report: IdentityReport,
}

/// `g*deltaQ(H1) - g*deltaQ(H2) + f`: equal to `f` on `x > 0` and `f - g` on `x <= 0`.
pub fn piecewise_via_delta(fs: &Expr, gs: &Expr, f: &Arc<FranklinMap>, grid: &Grid) -> Result<BranchCheck> {
    for (name, e) in [("f", fs), ("g", gs)] {
        if classify_smoothness(e).status != SmoothStatus::Smooth {
            return Err(Error::Invalid(format!("{name} = {e} is not certified smooth")));
        }
    }
    let e = (gs.clone() * Expr::delta_q(build_h1()) - gs.clone() * Expr::delta_q(Expr::bar_gamma(build_h1()))
        + fs.clone())
    .simplify();
    let report = verify_branches(&e, fs, &(fs.clone() - gs.clone()).simplify(), f, grid)?;
    Ok(BranchCheck {
        expr: e.to_string(),
        positive_branch: fs.simplify().to_string(),
        nonpositive_branch: (fs.clone() - gs.clone()).simplify().to_string(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::franklin::build_franklin;

    fn small() -> Arc<FranklinMap> {
        Arc::new(build_franklin(6).unwrap())
    }

    fn grid() -> Grid {
        Grid { rationals: 60, matched: 6, negatives: 20, seed: 1 }
    }

    #[test]
    fn h_examples() {
        let f = small();
        let (h2, ctx) = build_h2(&f);
        let at = |e: &Expr, x: i64| eval_tagged(e, &[TaggedReal::exact(QSqrt2::from_int(x))], &ctx).unwrap();
        let h1 = at(&build_h1(), -5);
        assert_eq!(h1.exact(), Some(&QSqrt2::zero()));
        let v = at(&h2, -5);
        assert_eq!(v.exact(), Some(&QSqrt2::inv_sqrt2()));
        assert_eq!(v.value().unwrap().tag(), Tag::Irrational);
        // matched source evaluates exactly
        let a = f.pairs[0].a.clone();
        let v = eval_tagged(&Expr::bar_gamma(Expr::x()), &[TaggedReal::rational(a)], &ctx).unwrap();
        assert_eq!(v.exact(), Some(&QSqrt2::from_rational(f.pairs[0].q.clone())));
    }

    #[test]
    fn link_examples() {
        let f = small();
        let link = certify_rationality_link(&f, &grid());
        assert!(link.excluded.is_empty(), "{:?}", link.excluded);
        let neg = link.samples.iter().find(|s| s.x == "-1" || s.x.starts_with('-')).unwrap();
        assert_eq!((neg.tag_a, neg.tag_b), (Tag::Rational, Tag::Irrational));
        let m = link.samples.iter().find(|s| s.x.starts_with("H1^-1")).unwrap();
        assert_eq!((m.tag_a, m.tag_b), (Tag::Rational, Tag::Rational));
        let pos = link.samples.iter().find(|s| !s.x.starts_with('-') && s.x != "0" && !s.x.starts_with('H')).unwrap();
        assert_eq!((pos.tag_a, pos.tag_b), (Tag::Irrational, Tag::Irrational));
    }

    #[test]
    fn identity_holds_on_grid() {
        let f = small();
        let g = grid();
        let link = certify_rationality_link(&f, &g);
        let rep = verify_abs_identity(&f, &link, &g).unwrap();
        assert_eq!(rep.checked, 86);
        assert_eq!(rep.matched, 6);
    }

    #[test]
    fn piecewise_examples() {
        let f = small();
        let g = Grid { rationals: 30, matched: 6, negatives: 10, seed: 2 };
        let c = piecewise_via_delta(&Expr::x(), &(Expr::int(2) * Expr::x()), &f, &g).unwrap();
        assert_eq!(c.nonpositive_branch, "-x");
        let c = piecewise_via_delta(&parse_expr("x^2").unwrap(), &Expr::zero(), &f, &g).unwrap();
        assert_eq!(c.expr, "x^2");
        let c = piecewise_via_delta(&parse_expr("x^2").unwrap(), &parse_expr("x^2").unwrap(), &f, &g).unwrap();
        assert_eq!(c.nonpositive_branch, "0");
        assert!(piecewise_via_delta(&parse_expr("abs(x)").unwrap(), &Expr::x(), &f, &g).is_err());
    }

    #[test]
    fn grid_text_parses() {
        let g: Grid = "rationals:5,matched:2,negatives:3,seed:9".parse().unwrap();
        assert_eq!(g.to_string(), "rationals:5,matched:2,negatives:3,seed:9");
        assert_eq!("".parse::<Grid>().unwrap(), Grid::default());
        assert!("bogus:1".parse::<Grid>().is_err());
    }
}
