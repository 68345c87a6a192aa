//! Named example spaces, the named axioms, and scripted scenarios that
//! rerun each worked example end to end and record what was checked.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;
use serde_json::Value;

use crate::constraints::{characteristic_decomposition, dual_basis, isotropic_from_dual, FACTS, IMPLICATIONS};
use crate::decompose::{
    check_sum, complementedness_report, decomposability_report, kernel_image_check, nonstandard_subspace_witness,
    replay_line_witness, replay_matrix_witness, replay_verdict, standardness, ComplementStatus, DecomposabilityStatus,
    KerImStatus, LinkContext, Standardness, WitnessSet,
};
use crate::diffeology::{DVSpace, LinearMap, Subspace};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, ClassifyContext, SmoothStatus, AXIOM_GAMMA, AXIOM_SQRT_IMPLICATION};
use crate::franklin::{verify_abs_identity, Grid, DEFAULT_ORDER};
use crate::numbers::int;

/// A named assumption. Verdicts relying on it list its name.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Axiom {
    pub name: &'static str,
    /// The fact template or implication the axiom makes available.
    pub statement: &'static str,
    pub facts: Vec<&'static str>,
    pub reference: &'static str,
}

pub fn axioms() -> Vec<Axiom> {
    let facts_for = |name: &str| -> Vec<&'static str> {
        FACTS
            .iter()
            .filter(|f| f.axiom == Some(name))
            .map(|f| f.id)
            .chain(IMPLICATIONS.iter().filter(|i| i.axiom == name).map(|i| i.id))
            .collect()
    };
    vec![
        Axiom {
            name: AXIOM_GAMMA,
            statement: "gamma is a non-smooth function with D_gamma meeting D_abs in the standard diffeology: c*gamma(x) + d*abs(x) smooth forces c = d = 0",
            facts: facts_for(AXIOM_GAMMA),
            reference: "existence of a non-smooth gamma whose diffeology meets that of abs only in smooth curves",
        },
        Axiom {
            name: AXIOM_SQRT_IMPLICATION,
            statement: "sum h_i*deltaQ(sqrt(abs(H_i))) smooth implies sum h_i*deltaQ(H_i) smooth",
            facts: facts_for(AXIOM_SQRT_IMPLICATION),
            reference: "open implication between the diffeologies of deltaQ(sqrt(abs(x))) and deltaQ(x)",
        },
    ]
}

pub fn axiom(name: &str) -> Result<Axiom> {
    axioms().into_iter().find(|a| a.name == name).ok_or_else(|| Error::UnknownName(name.into()))
}

pub const SPACE_NAMES: [&str; 5] = ["V2-delta", "R3-abs", "gamma-pair", "sqrt-delta", "W-nondecomposable"];

/// Axioms a gallery space is meant to be studied under. They are not
/// granted by the space itself; pass them explicitly.
pub fn attached_axioms(name: &str) -> &'static [&'static str] {
    match name {
        "gamma-pair" | "W-nondecomposable" => &[AXIOM_GAMMA],
        "sqrt-delta" => &[AXIOM_SQRT_IMPLICATION],
        _ => &[],
    }
}

pub fn gallery_space(name: &str) -> Result<DVSpace> {
    let (dim, gens): (usize, &[&[&str]]) = match name {
        "V2-delta" => (2, &[&["abs(x)", "abs(x)"], &["0", "deltaQ(x)"]]),
        "R3-abs" => (3, &[&["0", "abs(x)", "abs(x)"]]),
        "gamma-pair" => (2, &[&["gamma(x)", "gamma(x)"], &["0", "abs(x)"]]),
        "sqrt-delta" => (2, &[&["deltaQ(x)", "deltaQ(sqrt(abs(x)))"]]),
        "W-nondecomposable" => (2, &[&["abs(x)", "gamma(x)"]]),
        _ => return Err(Error::UnknownName(name.into())),
    };
    let generators = gens
        .iter()
        .map(|g| g.iter().map(|s| parse_expr(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    DVSpace::new(name, dim, generators, vec![])
}

static LINKS: OnceLock<Mutex<Vec<(usize, Grid, LinkContext)>>> = OnceLock::new();

/// The Franklin map of the given order with its certified rationality link,
/// built once per process and shared.
pub fn delta_link(order: usize, grid: Grid) -> Result<LinkContext> {
    let cache = LINKS.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().map_err(|_| Error::Internal("link cache poisoned".into()))?;
    if let Some((_, _, ctx)) = guard.iter().find(|(o, g, _)| *o == order && *g == grid) {
        return Ok(ctx.clone());
    }
    let ctx = LinkContext::build(order, grid)?;
    guard.push((order, grid, ctx.clone()));
    Ok(ctx)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ScenarioOptions {
    pub order: usize,
    pub grid: Grid,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions { order: DEFAULT_ORDER, grid: Grid::default() }
    }
}

/// One claim checked by a scenario.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Check {
    pub claim: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub axioms_used: Vec<String>,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub space: String,
    pub description: String,
    pub conditional: bool,
    pub axioms_used: Vec<String>,
    pub checks: Vec<Check>,
    pub details: BTreeMap<String, Value>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub struct ScenarioInfo {
    pub name: &'static str,
    pub space: &'static str,
    pub description: &'static str,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo { name: "v2-delta-dual", space: "V2-delta", description: "no nonzero smooth functional on V2-delta" },
    ScenarioInfo {
        name: "v2-delta-sum",
        space: "V2-delta",
        description: "Span(e1) (+) Span(e2) is a smooth sum of V2-delta, using abs(x) = 2x*deltaQ(H1(x)) - 2x*deltaQ(H2(x)) + x",
    },
    ScenarioInfo {
        name: "v2-delta-lines",
        space: "V2-delta",
        description: "every line of V2-delta carries a non-standard subset diffeology",
    },
    ScenarioInfo { name: "r3-nonsmooth-sum", space: "R3-abs", description: "Span(e1,e2) (+) Span(e3) is not a smooth sum of R3-abs" },
    ScenarioInfo {
        name: "r3-decompositions",
        space: "R3-abs",
        description: "the characteristic subspace of R3-abs has smooth and non-smooth complements",
    },
    ScenarioInfo {
        name: "r3-kernel-image",
        space: "R3-abs",
        description: "R3-abs is diffeomorphic to ker f x im f for f = diag(1,1,0)",
    },
    ScenarioInfo {
        name: "gamma-pair",
        space: "gamma-pair",
        description: "Span(e1) is not complemented in the gamma-pair space, while Span(e1+e2) is",
    },
    ScenarioInfo {
        name: "w-nondecomposable",
        space: "W-nondecomposable",
        description: "W has no nonzero smooth functional and no nontrivial smooth splitting",
    },
    ScenarioInfo {
        name: "sqrt-delta",
        space: "sqrt-delta",
        description: "Span(e1) in the sqrt-delta space is standard and not complemented given the sqrt implication",
    },
];

struct Builder {
    info: &'static ScenarioInfo,
    checks: Vec<Check>,
    details: BTreeMap<String, Value>,
}

impl Builder {
    fn check(&mut self, claim: impl Into<String>, expected: impl ToString, observed: impl ToString, axioms: &[String]) {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        self.checks.push(Check { claim: claim.into(), pass: expected == observed, expected, observed, axioms_used: axioms.to_vec() });
    }

    fn detail<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        let v = serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))?;
        self.details.insert(key.into(), v);
        Ok(())
    }

    fn replayed(&mut self, claim: &str, r: Result<()>) {
        let observed = match r {
            Ok(()) => "replayed".to_string(),
            Err(e) => e.to_string(),
        };
        self.check(claim, "replayed", observed, &[]);
    }

    fn finish(self) -> ScenarioReport {
        let mut axioms_used: Vec<String> = Vec::new();
        for c in &self.checks {
            for a in &c.axioms_used {
                if !axioms_used.contains(a) {
                    axioms_used.push(a.clone());
                }
            }
        }
        axioms_used.sort();
        ScenarioReport {
            scenario: self.info.name.into(),
            space: self.info.space.into(),
            description: self.info.description.into(),
            conditional: !axioms_used.is_empty(),
            axioms_used,
            checks: self.checks,
            details: self.details,
        }
    }
}

fn ctx_with(axioms: &[&str]) -> ClassifyContext {
    ClassifyContext::with_axioms(axioms)
}

fn line(n: usize, v: &[i64]) -> Subspace {
    debug_assert_eq!(v.len(), n);
    Subspace::span(n, &[v.iter().map(|&x| int(x)).collect()])
}

fn status<T: std::fmt::Debug>(s: T) -> String {
    format!("{s:?}")
}

pub fn scenario_names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|s| s.name).collect()
}

/// Runs a registered scenario. Reports contain no timings and are
/// byte-identical across runs with the same options.
pub fn run_scenario(name: &str, opts: &ScenarioOptions) -> Result<ScenarioReport> {
    let info = SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownName(name.into()))?;
    let v = gallery_space(info.space)?;
    let mut b = Builder { info, checks: vec![], details: BTreeMap::new() };
    let none = ClassifyContext::default();
    let empty = WitnessSet::empty();
    match name {
        "v2-delta-dual" => {
            let dual = dual_basis(&v, &none);
            b.check("dual dimension", "Some(0)", status(dual.dim()), &dual.system.axioms_used);
            let iso = isotropic_from_dual(v.dim, &dual.basis);
            b.check("maximal isotropic subspace is the whole space", true, iso.same_as(&Subspace::whole(2)), &[]);
            b.detail("dual", &dual)?;
        }
        "v2-delta-sum" => {
            let link = delta_link(opts.order, opts.grid)?;
            let id = verify_abs_identity(&link.franklin, &link.link, &opts.grid);
            b.check("abs identity holds at every grid point", "ok", id.as_ref().map_or_else(|e| e.to_string(), |_| "ok".into()), &[]);
            if let Ok(r) = &id {
                b.detail("identity", r)?;
            }
            let ws = WitnessSet::abs_from_delta(&v, link);
            let d = check_sum(&v, &Subspace::coords(2, &[1]), &Subspace::coords(2, &[2]), &ws, &none)?;
            b.check("Span(e1) (+) Span(e2)", "SmoothCertified", status(d.status), &d.axioms_used);
            b.replayed("sum certificate replays", replay_verdict(&v, &d, &ws, &none));
            b.detail("verdict", &d)?;
            let u = check_sum(&v, &Subspace::coords(2, &[1]), &Subspace::coords(2, &[2]), &empty, &none)?;
            b.check("without derived plots the sum is undecided", "Unknown", status(u.status), &u.axioms_used);
        }
        "v2-delta-lines" => {
            let ws = WitnessSet::abs_from_delta(&v, delta_link(opts.order, opts.grid)?);
            let mut witnesses = Vec::new();
            for dir in [[1, 1], [1, 0], [0, 1], [2, -3], [-5, 7]] {
                let u: Vec<_> = dir.iter().map(|&x| int(x)).collect();
                let w = nonstandard_subspace_witness(&v, &u, &ws, &none)?;
                let label = format!("Span({},{})", dir[0], dir[1]);
                b.check(format!("{label} is non-standard"), "NonStandard", status(w.status), &w.axioms_used);
                b.check(format!("{label} witness is non-smooth"), status(SmoothStatus::NonSmooth), w.verdict.as_ref().map_or_else(|| "missing".into(), |v| status(v.status)), &[]);
                b.replayed(&format!("{label} witness replays"), replay_line_witness(&v, &w, &ws, &none));
                witnesses.push(w);
            }
            b.detail("witnesses", &witnesses)?;
        }
        "r3-nonsmooth-sum" => {
            let dual = dual_basis(&v, &none);
            b.check("dual dimension", "Some(2)", status(dual.dim()), &dual.system.axioms_used);
            let iso = isotropic_from_dual(3, &dual.basis);
            b.check("maximal isotropic subspace", line(3, &[0, 1, 1]).to_string(), iso.to_string(), &[]);
            let d = check_sum(&v, &Subspace::coords(3, &[1, 2]), &Subspace::coords(3, &[3]), &empty, &none)?;
            b.check("Span(e1,e2) (+) Span(e3)", "NonSmooth", status(d.status), &d.axioms_used);
            b.replayed("refutation replays", replay_verdict(&v, &d, &empty, &none));
            b.detail("verdict", &d)?;
            let t = check_sum(&v, &Subspace::whole(3), &Subspace::zero(3), &empty, &none)?;
            b.check("V (+) 0", "SmoothCertified", status(t.status), &t.axioms_used);
        }
        "r3-decompositions" => {
            let c = characteristic_decomposition(&v, &none)?;
            let r = decomposability_report(&v, &empty, &none)?;
            b.check("decomposability", "Decomposable", status(r.status), &r.axioms_used);
            if let Some(d) = &r.decomposition {
                b.check("first summand is characteristic", true, d.w0.same_as(&c.v0), &[]);
                b.check("second summand is maximal isotropic", true, d.w1.same_as(&c.v1), &[]);
                b.check("characteristic sum", "SmoothCertified", status(d.status), &d.axioms_used);
            } else {
                b.check("characteristic sum", "SmoothCertified", "missing", &[]);
            }
            let coord = r.non_smooth_alternatives.iter().find(|a| a.w1.same_as(&Subspace::coords(3, &[3])));
            b.check(
                "characteristic subspace (+) Span(e3)",
                "NonSmooth",
                coord.map_or_else(|| "missing".into(), |a| status(a.status)),
                &[],
            );
            b.detail("report", &r)?;
        }
        "r3-kernel-image" => {
            let f = LinearMap::parse("[[1,0,0],[0,1,0],[0,0,0]]")?;
            let r = kernel_image_check(&v, &f, &empty, &none)?;
            b.check("ker f x im f", "Diffeomorphic", status(r.status), &r.axioms_used);
            match &r.witness {
                Some(w) => b.replayed("matrix witness replays", replay_matrix_witness(&v, w, &empty)),
                None => b.check("matrix witness replays", "replayed", "no witness", &[]),
            }
            b.detail("report", &r)?;
        }
        "gamma-pair" => {
            let a = ctx_with(&[AXIOM_GAMMA]);
            let d = check_sum(&v, &line(2, &[1, 1]), &line(2, &[0, 1]), &empty, &a)?;
            b.check("Span(e1+e2) (+) Span(e2)", "SmoothCertified", status(d.status), &d.axioms_used);
            b.replayed("sum certificate replays", replay_verdict(&v, &d, &empty, &a));
            let r = complementedness_report(&v, &Subspace::coords(2, &[1]), &empty, &a)?;
            b.check("Span(e1) under A", status(ComplementStatus::NotComplemented), status(r.status), &r.axioms_used);
            let u = complementedness_report(&v, &Subspace::coords(2, &[1]), &empty, &none)?;
            b.check("Span(e1) without axioms", status(ComplementStatus::Unknown), status(u.status), &u.axioms_used);
            b.detail("sum", &d)?;
            b.detail("complementedness", &r)?;
        }
        "w-nondecomposable" => {
            let a = ctx_with(&[AXIOM_GAMMA]);
            let dual = dual_basis(&v, &a);
            b.check("dual dimension under A", "Some(0)", status(dual.dim()), &dual.system.axioms_used);
            let r = decomposability_report(&v, &empty, &a)?;
            b.check("decomposability under A", status(DecomposabilityStatus::NonDecomposable), status(r.status), &r.axioms_used);
            let u = decomposability_report(&v, &empty, &none)?;
            b.check("decomposability without axioms", status(DecomposabilityStatus::Unknown), status(u.status), &u.axioms_used);
            for m in ["[[1,0],[0,0]]", "[[0,0],[0,1]]", "[[1,1],[2,2]]"] {
                let k = kernel_image_check(&v, &LinearMap::parse(m)?, &empty, &a)?;
                b.check(format!("ker f x im f for f = {m}"), status(KerImStatus::NoDiffeomorphism), status(k.status), &k.axioms_used);
            }
            b.detail("report", &r)?;
        }
        "sqrt-delta" => {
            let dual = dual_basis(&v, &none);
            b.check("dual dimension", "Some(0)", status(dual.dim()), &dual.system.axioms_used);
            let e1 = Subspace::coords(2, &[1]);
            let s0 = standardness(&v, &e1, &empty, &none);
            b.check("Span(e1) without the implication", status(Standardness::Unknown), status(s0.status), &s0.axioms_used);
            let s = ctx_with(&[AXIOM_SQRT_IMPLICATION]);
            let st = standardness(&v, &e1, &empty, &s);
            b.check("Span(e1) is standard", status(Standardness::Standard), status(st.status), &st.axioms_used);
            let r = complementedness_report(&v, &e1, &empty, &s)?;
            b.check("complementedness of Span(e1)", status(ComplementStatus::NotComplemented), status(r.status), &r.axioms_used);
            b.detail("complementedness", &r)?;
        }
        _ => return Err(Error::Internal(format!("scenario {name} has no script"))),
    }
    Ok(b.finish())
}
