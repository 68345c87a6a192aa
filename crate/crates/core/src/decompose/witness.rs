//! Derived plots: normal-form plots together with the value they are
//! claimed to equal, checked through the rationality link.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::diffeology::{DVSpace, Plot, PlotTerm};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, rewrite_delta_cancellation, Expr, RationalityLink, Region};
use crate::franklin::{build_franklin, certify_rationality_link, verify_branches, FranklinMap, Grid};

/// A plot of a space and the curve it equals.
#[derive(Clone, PartialEq, Debug)]
pub struct DerivedPlot {
    pub name: String,
    pub plot: Plot,
    pub claimed: Vec<Expr>,
}

/// The Franklin map, its rationality link and the grid the link was
/// certified on.
#[derive(Clone, Debug)]
pub struct LinkContext {
    pub franklin: Arc<FranklinMap>,
    pub link: RationalityLink,
    pub grid: Grid,
}

impl LinkContext {
    pub fn new(franklin: Arc<FranklinMap>, grid: Grid) -> Self {
        let link = certify_rationality_link(&franklin, &grid);
        LinkContext { franklin, link, grid }
    }

    pub fn build(order: usize, grid: Grid) -> Result<Self> {
        Ok(LinkContext::new(Arc::new(build_franklin(order)?), grid))
    }
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct DerivedCheck {
    pub name: String,
    pub claimed: Vec<String>,
    pub plot: String,
    pub derivation: Vec<String>,
    pub points_checked: usize,
}

/// Verified derived plots plus the ones whose check failed.
#[derive(Clone, Debug, Default)]
pub struct WitnessSet {
    pub derived: Vec<DerivedPlot>,
    pub checks: Vec<DerivedCheck>,
    pub rejected: Vec<(String, String)>,
    pub context: Option<LinkContext>,
}

fn abs_x() -> Expr {
    Expr::abs(Expr::x())
}

/// Checks `realize(plot) = claimed` coordinatewise: literally when the
/// difference normalizes to zero, otherwise by rewriting on both half-lines
/// and by tagged evaluation on the link grid.
pub fn verify_derived(space: &DVSpace, d: &DerivedPlot, ctx: Option<&LinkContext>) -> Result<DerivedCheck> {
    if d.claimed.len() != space.dim {
        return Err(Error::Shape(format!("{} claims {} coordinates", d.name, d.claimed.len())));
    }
    let real = d.plot.realize(space)?;
    let mut check = DerivedCheck {
        name: d.name.clone(),
        claimed: d.claimed.iter().map(ToString::to_string).collect(),
        plot: d.plot.to_string(),
        derivation: vec![],
        points_checked: 0,
    };
    for (k, (r, c)) in real.iter().zip(&d.claimed).enumerate() {
        let diff = (r.clone() - c.clone()).normalize();
        if diff.is_zero() {
            check.derivation.push(format!("coordinate {}: {r} = {c} identically", k + 1));
            continue;
        }
        let ctx = ctx.ok_or_else(|| {
            Error::Verification(format!("{}: coordinate {} needs a rationality link", d.name, k + 1))
        })?;
        for (region, abs_value) in [(Region::Positive, Expr::x()), (Region::NonPositive, -Expr::x())] {
            let branch = diff.replace(&abs_x(), &abs_value);
            let rewritten = rewrite_delta_cancellation(&branch, Some(&ctx.link), region)?.normalize();
            if !rewritten.is_zero() {
                return Err(Error::Verification(format!(
                    "{}: coordinate {} rewrites to {rewritten} on {region:?}",
                    d.name,
                    k + 1
                )));
            }
        }
        let rep = verify_branches(&diff, &Expr::zero(), &Expr::zero(), &ctx.franklin, &ctx.grid)
            .map_err(|e| Error::Verification(format!("{}: coordinate {}: {e}", d.name, k + 1)))?;
        check.points_checked += rep.checked;
        check.derivation.push(format!(
            "coordinate {}: {r} - ({c}) cancels on x > 0 and on x <= 0 under the link; {} grid points agree",
            k + 1,
            rep.checked
        ));
    }
    Ok(check)
}

impl WitnessSet {
    pub fn empty() -> Self {
        WitnessSet::default()
    }

    /// Verifies each plot; failures are kept in `rejected` with the reason.
    pub fn new(space: &DVSpace, plots: Vec<DerivedPlot>, context: Option<LinkContext>) -> Self {
        let mut ws = WitnessSet { context, ..Default::default() };
        for d in plots {
            match verify_derived(space, &d, ws.context.as_ref()) {
                Ok(c) => {
                    ws.checks.push(c);
                    ws.derived.push(d);
                }
                Err(e) => ws.rejected.push((d.name.clone(), e.to_string())),
            }
        }
        ws
    }

    /// The plots `x -> |x| e_k` obtainable from generators `(0,..,deltaQ(x),..,0)`
    /// through `|x| = 2x*deltaQ(H1(x)) - 2x*deltaQ(H2(x)) + x`, and from
    /// generators `|x|*u` after removing those coordinates.
    pub fn abs_from_delta(space: &DVSpace, context: LinkContext) -> Self {
        let n = space.dim;
        let h1 = Expr::h1(Expr::x());
        let h2 = Expr::bar_gamma(Expr::h1(Expr::x()));
        let two_x = Expr::int(2) * Expr::x();
        let mut units: Vec<Option<Plot>> = vec![None; n];
        for (i, g) in space.generators.iter().enumerate() {
            let nz: Vec<usize> = (0..n).filter(|&k| !g[k].is_zero()).collect();
            if let [k] = nz[..] {
                if g[k] == Expr::delta_q(Expr::x()) && units[k].is_none() {
                    let mut tail = vec![Expr::zero(); n];
                    tail[k] = Expr::x();
                    units[k] = Some(Plot {
                        terms: vec![
                            PlotTerm { h: two_x.clone().simplify(), generator: i, inner: h1.clone() },
                            PlotTerm { h: (-two_x.clone()).simplify(), generator: i, inner: h2.clone() },
                        ],
                        tail,
                        domain: "R".into(),
                    });
                }
            }
        }
        for (i, g) in space.generators.iter().enumerate() {
            let Some(sig) = super::signature::signature(g) else { continue };
            let Some((_, u)) = sig.atoms.get(&abs_x().to_string()) else { continue };
            if sig.atoms.len() != 1 || !sig.smooth.iter().all(Expr::is_zero) {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|&k| !num_traits::Zero::is_zero(&u[k]) && units[k].is_none()).collect();
            let [m] = rest[..] else { continue };
            if u[m] != crate::numbers::int(1) {
                continue;
            }
            let mut p = Plot::generator(space, i);
            for k in 0..n {
                if k != m && !num_traits::Zero::is_zero(&u[k]) {
                    let c = Expr::rational(-u[k].clone());
                    p = p.add(&units[k].clone().expect("checked above").scale(&c)).expect("same space");
                }
            }
            units[m] = Some(p);
        }
        let plots = units
            .into_iter()
            .enumerate()
            .filter_map(|(k, p)| {
                p.map(|plot| {
                    let mut claimed = vec![Expr::zero(); n];
                    claimed[k] = abs_x();
                    DerivedPlot { name: format!("abs_e{}", k + 1), plot, claimed }
                })
            })
            .collect();
        WitnessSet::new(space, plots, Some(context))
    }

    /// Reads the text format written by `Display`.
    pub fn parse(space: &DVSpace, text: &str, context: Option<LinkContext>) -> Result<Self> {
        let plots = parse_derived(space, text)?;
        Ok(WitnessSet::new(space, plots, context))
    }

    /// Whether any plot needs the link to be checked.
    pub fn needs_link(space: &DVSpace, text: &str) -> Result<bool> {
        Ok(parse_derived(space, text)?
            .iter()
            .any(|d| verify_derived(space, d, None).is_err()))
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos: line, msg: msg.into() }
}

fn parse_list(s: &str, line: usize) -> Result<Vec<Expr>> {
    s.split(',')
        .map(|t| parse_expr(t.trim()).map_err(|e| syntax(line, e.to_string())))
        .collect()
}

/// ```text
/// derived abs_e2 = 0, abs(x)
/// term 2*x | g2 | H1(x)
/// term -2*x | g2 | barGamma(H1(x))
/// tail 0, x
/// ```
fn parse_derived(space: &DVSpace, text: &str) -> Result<Vec<DerivedPlot>> {
    let mut out: Vec<DerivedPlot> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "derived" => {
                let (name, claimed) = rest.split_once('=').ok_or_else(|| syntax(ln, "expected `derived NAME = e1, e2, ..`"))?;
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(syntax(ln, "derived plot needs a one-word name"));
                }
                let claimed = parse_list(claimed, ln)?;
                if claimed.len() != space.dim {
                    return Err(syntax(ln, format!("expected {} coordinates", space.dim)));
                }
                out.push(DerivedPlot { name: name.into(), plot: Plot::zero(space.dim), claimed });
            }
            "term" => {
                let cur = out.last_mut().ok_or_else(|| syntax(ln, "`term` before `derived`"))?;
                let parts: Vec<&str> = rest.split('|').map(str::trim).collect();
                let [h, g, inner] = parts[..] else {
                    return Err(syntax(ln, "expected `term h | gK | H`"));
                };
                let i = g
                    .strip_prefix('g')
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&i| i >= 1 && i <= space.generators.len())
                    .ok_or_else(|| syntax(ln, format!("unknown generator {g}")))?;
                let h = parse_expr(h).map_err(|e| syntax(ln, e.to_string()))?;
                let inner = parse_expr(inner).map_err(|e| syntax(ln, e.to_string()))?;
                cur.plot.terms.push(PlotTerm { h, generator: i - 1, inner });
            }
            "tail" => {
                let cur = out.last_mut().ok_or_else(|| syntax(ln, "`tail` before `derived`"))?;
                let tail = parse_list(rest, ln)?;
                if tail.len() != space.dim {
                    return Err(syntax(ln, format!("expected {} coordinates", space.dim)));
                }
                cur.plot.tail = tail;
            }
            other => return Err(syntax(ln, format!("unknown keyword `{other}`"))),
        }
    }
    Ok(out)
}

impl fmt::Display for DerivedPlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Expr]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        writeln!(f, "derived {} = {}", self.name, join(&self.claimed))?;
        for t in &self.plot.terms {
            writeln!(f, "term {} | g{} | {}", t.h, t.generator + 1, t.inner)?;
        }
        writeln!(f, "tail {}", join(&self.plot.tail))
    }
}

impl fmt::Display for WitnessSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.derived {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2() -> DVSpace {
        let p = |s: &str| parse_expr(s).unwrap();
        DVSpace::new("V2", 2, vec![vec![p("abs(x)"), p("abs(x)")], vec![p("0"), p("deltaQ(x)")]], vec![]).unwrap()
    }

    fn ctx() -> LinkContext {
        LinkContext::build(4, Grid { rationals: 40, matched: 4, negatives: 10, seed: 3 }).unwrap()
    }

    #[test]
    fn builtin_plots_verify_and_round_trip() {
        let v = v2();
        let ws = WitnessSet::abs_from_delta(&v, ctx());
        assert!(ws.rejected.is_empty(), "{:?}", ws.rejected);
        let names: Vec<&str> = ws.derived.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["abs_e1", "abs_e2"]);
        assert!(ws.checks.iter().all(|c| c.points_checked > 0));
        let text = ws.to_string();
        assert!(WitnessSet::needs_link(&v, &text).unwrap());
        let again = WitnessSet::parse(&v, &text, Some(ctx())).unwrap();
        assert_eq!(again.derived, ws.derived);
    }

    #[test]
    fn wrong_claims_are_rejected() {
        let v = v2();
        let bad = "derived bad = abs(x), abs(x)\nterm 2*x | g2 | H1(x)\nterm -2*x | g2 | barGamma(H1(x))\ntail 0, x\n";
        let ws = WitnessSet::parse(&v, bad, Some(ctx())).unwrap();
        assert!(ws.derived.is_empty());
        assert_eq!(ws.rejected.len(), 1);
        // literal identities need no link
        let lit = "derived p = abs(x), abs(x)\nterm 1 | g1 | x\ntail 0, 0\n";
        let ws = WitnessSet::parse(&v, lit, None).unwrap();
        assert_eq!(ws.derived.len(), 1);
        assert!(WitnessSet::parse(&v, "term 1 | g1 | x", None).is_err());
        assert!(WitnessSet::parse(&v, "derived q = 0\n", None).is_err());
    }
}
