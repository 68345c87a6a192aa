mod report;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use dvkit::constraints::{characteristic_decomposition, dual_basis, isotropic_from_dual};
use dvkit::decompose::{
    check_sum, complementedness_report, decomposability_report, kernel_image_check, nonstandard_subspace_witness,
    replay_line_witness, replay_matrix_witness, replay_verdict, WitnessSet,
};
use dvkit::diffeology::{parse_space, print_space, DVSpace, LinearMap, Subspace};
use dvkit::expr::{AXIOM_GAMMA, AXIOM_SQRT_IMPLICATION};
use dvkit::franklin::{build_franklin, verify_abs_identity, verify_franklin, DEFAULT_ORDER};
use dvkit::gallery::{self, ScenarioOptions};
use dvkit::numbers::fmt_rational;
use dvkit::{ClassifyContext, Error, Grid};

use report::{Inputs, Report, TOOL_VERSION};

#[derive(Parser)]
#[command(name = "dvkit", version, about = "Exact checks on finite-dimensional diffeological vector spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Grant a named axiom (repeatable): A, sqrt-implication.
    #[arg(long = "axiom", global = true, value_name = "NAME")]
    axioms: Vec<String>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Clone)]
struct LinkArgs {
    /// Truncation order of the Franklin map.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    n: usize,
    /// Sample grid, e.g. rationals:1000,matched:16,negatives:100,seed:0.
    #[arg(long, default_value_t = Grid::default())]
    grid: Grid,
}

#[derive(Args, Clone)]
struct WitnessArgs {
    /// Derived plots: `builtin` or a witness file.
    #[arg(long)]
    witness: Option<String>,
    #[command(flatten)]
    link: LinkArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Dual, maximal isotropic subspace, characteristic decomposition and decomposability.
    Analyze {
        space: String,
        #[command(flatten)]
        w: WitnessArgs,
    },
    /// Whether V = W0 (+) W1 is a smooth direct sum.
    CheckSum {
        space: String,
        w0: String,
        w1: String,
        #[command(flatten)]
        w: WitnessArgs,
    },
    /// Whether a subspace has a smooth complement.
    Complement {
        space: String,
        subspace: String,
        #[command(flatten)]
        w: WitnessArgs,
    },
    /// Whether V is diffeomorphic to ker f x im f.
    KernelImage {
        space: String,
        map: String,
        #[command(flatten)]
        w: WitnessArgs,
    },
    /// The plot x -> |x|*u and the standardness of Span(u).
    LineWitness {
        space: String,
        direction: String,
        #[command(flatten)]
        w: WitnessArgs,
    },
    /// Build and replay the Franklin map.
    Franklin {
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        n: usize,
    },
    /// Check the abs identity on a grid.
    VerifyIdentity {
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Run gallery scenarios.
    Scenario {
        /// Scenario name; all scenarios when omitted.
        name: Option<String>,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Gallery spaces, scenarios and axioms.
    List,
}

/// Failure with an exit code: 1 for verification failures, 2 for bad input.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Verification(_) | Error::Internal(_) | Error::RegionNotCovered(_) | Error::Undetermined(_) => 1,
            _ => 2,
        };
        Failure(code, e.to_string())
    }
}

fn input_err(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report parts serialize")
}

fn status<T: std::fmt::Debug>(s: T) -> String {
    format!("{s:?}")
}

fn merge(into: &mut Vec<String>, more: &[String]) {
    for a in more {
        if !into.contains(a) {
            into.push(a.clone());
        }
    }
}

struct Session {
    inputs: Inputs,
    axioms: Vec<String>,
}

impl Session {
    fn space(&mut self, arg: &str) -> Result<DVSpace, Failure> {
        let v = if gallery::SPACE_NAMES.contains(&arg) {
            gallery::gallery_space(arg)?
        } else if Path::new(arg).is_file() {
            let text = std::fs::read_to_string(arg).map_err(|e| input_err(format!("{arg}: {e}")))?;
            parse_space(&text)?
        } else {
            return Err(input_err(format!("`{arg}` is neither a gallery space nor a readable file")));
        };
        self.inputs.add("space", print_space(&v));
        Ok(v)
    }

    fn ctx(&self, v: &DVSpace) -> ClassifyContext {
        let mut axioms = self.axioms.clone();
        merge(&mut axioms, &v.axioms);
        ClassifyContext { axioms, ..Default::default() }
    }

    fn witnesses(&mut self, v: &DVSpace, w: &WitnessArgs) -> Result<WitnessSet, Failure> {
        let Some(src) = &w.witness else {
            return Ok(WitnessSet::empty());
        };
        self.inputs.add("order", w.link.n.to_string());
        self.inputs.add("grid", w.link.grid.to_string());
        let set = if src == "builtin" {
            self.inputs.add("witness", "builtin");
            WitnessSet::abs_from_delta(v, gallery::delta_link(w.link.n, w.link.grid)?)
        } else {
            let text = std::fs::read_to_string(src).map_err(|e| input_err(format!("{src}: {e}")))?;
            self.inputs.add("witness", &text);
            let ctx = if WitnessSet::needs_link(v, &text)? { Some(gallery::delta_link(w.link.n, w.link.grid)?) } else { None };
            WitnessSet::parse(v, &text, ctx)?
        };
        if let Some((name, why)) = set.rejected.first() {
            return Err(Failure(1, format!("derived plot {name} does not verify: {why}")));
        }
        Ok(set)
    }
}

fn subspace(n: usize, text: &str, inputs: &mut Inputs, key: &str) -> Result<Subspace, Failure> {
    let s = Subspace::parse(n, text)?;
    inputs.add(key, s.to_string());
    Ok(s)
}

fn derived_summary(ws: &WitnessSet) -> Vec<String> {
    ws.checks.iter().map(|c| format!("derived {} = ({}) checked at {} points", c.name, c.claimed.join(","), c.points_checked)).collect()
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let known = [AXIOM_GAMMA, AXIOM_SQRT_IMPLICATION];
    let mut axioms: Vec<String> = Vec::new();
    for a in &cli.axioms {
        let a = a.strip_prefix("axiom:").unwrap_or(a);
        if !known.contains(&a) {
            return Err(input_err(format!("unknown axiom `{a}`; known: {}", known.join(", "))));
        }
        merge(&mut axioms, &[a.to_string()]);
    }
    axioms.sort();
    let mut s = Session { inputs: Inputs::default(), axioms };
    let command = match &cli.command {
        Command::Analyze { .. } => "analyze",
        Command::CheckSum { .. } => "check-sum",
        Command::Complement { .. } => "complement",
        Command::KernelImage { .. } => "kernel-image",
        Command::LineWitness { .. } => "line-witness",
        Command::Franklin { .. } => "franklin",
        Command::VerifyIdentity { .. } => "verify-identity",
        Command::Scenario { .. } => "scenario",
        Command::List => "list",
    };
    s.inputs.add("command", command);
    s.inputs.add("axioms", s.axioms.join(","));
    let mut axioms_used: Vec<String> = Vec::new();
    let mut summary: Vec<String> = Vec::new();
    let (status, result) = match &cli.command {
        Command::Analyze { space, w } => {
            let v = s.space(space)?;
            let ctx = s.ctx(&v);
            let ws = s.witnesses(&v, w)?;
            let dual = dual_basis(&v, &ctx);
            merge(&mut axioms_used, &dual.system.axioms_used);
            let iso = dual.exact.then(|| isotropic_from_dual(v.dim, &dual.basis));
            match dual.dim() {
                Some(d) => summary.push(format!("dual_dim: {d}")),
                None => summary.push(format!("dual_dim: between {} and {}", dual.dim_lower, dual.dim_upper)),
            }
            if let Some(i) = &iso {
                let whole = if i.dim() == v.dim { " (whole space)" } else { "" };
                summary.push(format!("isotropic: {i}{whole}"));
            }
            let ch = characteristic_decomposition(&v, &ctx).ok();
            if let Some(c) = &ch {
                summary.push(format!("characteristic: {} (+) {}", c.v0, c.v1));
            }
            let r = decomposability_report(&v, &ws, &ctx)?;
            merge(&mut axioms_used, &r.axioms_used);
            summary.push(format!("decomposability: {:?}{}", r.status, if r.conditional { " (conditional)" } else { "" }));
            summary.extend(derived_summary(&ws));
            (
                status(r.status),
                json!({
                    "space": print_space(&v),
                    "dual_dim": dual.dim(),
                    "dual": to_value(&dual),
                    "isotropic": iso.as_ref().map(to_value),
                    "characteristic": ch.as_ref().map(to_value),
                    "decomposability": to_value(&r),
                }),
            )
        }
        Command::CheckSum { space, w0, w1, w } => {
            let v = s.space(space)?;
            let ctx = s.ctx(&v);
            let a = subspace(v.dim, w0, &mut s.inputs, "w0")?;
            let b = subspace(v.dim, w1, &mut s.inputs, "w1")?;
            let ws = s.witnesses(&v, w)?;
            let d = check_sum(&v, &a, &b, &ws, &ctx)?;
            replay_verdict(&v, &d, &ws, &ctx)?;
            merge(&mut axioms_used, &d.axioms_used);
            summary.push(format!("sum: {a} (+) {b}"));
            summary.push(format!("verdict: {:?}", d.status));
            if let Some(r) = &d.reason {
                summary.push(format!("reason: {r}"));
            }
            if let Some(r) = &d.refutation {
                summary.push(format!("refuted by: generator {} coordinate {} = {}", r.generator, r.coordinate, r.expr));
            }
            summary.extend(derived_summary(&ws));
            (status(d.status), to_value(&d))
        }
        Command::Complement { space, subspace: w, w: wa } => {
            let v = s.space(space)?;
            let ctx = s.ctx(&v);
            let sub = subspace(v.dim, w, &mut s.inputs, "subspace")?;
            let ws = s.witnesses(&v, wa)?;
            let r = complementedness_report(&v, &sub, &ws, &ctx)?;
            if let Some(d) = &r.decomposition {
                replay_verdict(&v, d, &ws, &ctx)?;
            }
            merge(&mut axioms_used, &r.axioms_used);
            summary.push(format!("subspace: {sub}"));
            summary.push(format!("complemented: {:?}{}", r.status, if r.conditional { " (conditional)" } else { "" }));
            summary.push(format!("reason: {}", r.reason));
            (status(r.status), to_value(&r))
        }
        Command::KernelImage { space, map, w } => {
            let v = s.space(space)?;
            let ctx = s.ctx(&v);
            let f = LinearMap::parse(map)?;
            s.inputs.add("map", f.to_string());
            let ws = s.witnesses(&v, w)?;
            let r = kernel_image_check(&v, &f, &ws, &ctx)?;
            if let Some(m) = &r.witness {
                replay_matrix_witness(&v, m, &ws)?;
                summary.push(format!("matrix: {:?}", m.matrix));
            }
            merge(&mut axioms_used, &r.axioms_used);
            summary.push(format!("kernel_image: {:?}{}", r.status, if r.conditional { " (conditional)" } else { "" }));
            summary.push(format!("reason: {}", r.reason));
            (status(r.status), to_value(&r))
        }
        Command::LineWitness { space, direction, w } => {
            let v = s.space(space)?;
            let ctx = s.ctx(&v);
            let u = dvkit::diffeology::parse_vector(direction)?;
            s.inputs.add("direction", direction);
            let ws = s.witnesses(&v, w)?;
            let lw = nonstandard_subspace_witness(&v, &u, &ws, &ctx)?;
            if lw.plot.is_some() {
                replay_line_witness(&v, &lw, &ws, &ctx)?;
            }
            merge(&mut axioms_used, &lw.axioms_used);
            summary.push(format!("line: Span{}", lw.direction));
            summary.push(format!("standardness: {:?}", lw.status));
            if let Some(verdict) = &lw.verdict {
                summary.push(format!("witness classifies: {:?}", verdict.status));
            }
            (status(lw.status), to_value(&lw))
        }
        Command::Franklin { n } => {
            s.inputs.add("order", n.to_string());
            let f = build_franklin(*n)?;
            verify_franklin(&f)?;
            let pairs: Vec<Value> = f
                .pairs
                .iter()
                .map(|p| json!({"step": p.step, "direction": p.direction, "a": fmt_rational(&p.a), "b": p.b.to_string(), "q": fmt_rational(&p.q)}))
                .collect();
            let decay: Vec<Value> = f
                .corrections
                .iter()
                .enumerate()
                .map(|(k, c)| json!({"n": k + 1, "bound": (c.coeff.abs() * dvkit::QSqrt2::from_rational(c.sup_bound())).to_f64(), "limit": 0.5f64.powi(k as i32 + 1)}))
                .collect();
            let cert = &f.certificate;
            summary.push(format!("matched pairs: {} (exact)", f.pairs.len()));
            for p in &f.pairs {
                summary.push(format!("  {} {:?}: f({}) = {}, w = {}", p.step, p.direction, fmt_rational(&p.a), p.b, fmt_rational(&p.q)));
            }
            summary.push(format!(
                "derivative lower bound on [{}, {}]: {:.6} ({} pieces, exact value in JSON)",
                fmt_rational(&cert.lo),
                fmt_rational(&cert.hi),
                dvkit::QSqrt2::from_rational(cert.min_lower_bound()).to_f64(),
                cert.pieces.len()
            ));
            summary.push(format!("decay bound |c_n|*sup|p_n| <= 2^-n: holds for n <= {}", f.corrections.len()));
            (
                "verified".to_string(),
                json!({
                    "order": f.order,
                    "pairs": pairs,
                    "derivative_floor": f.derivative_floor.to_string(),
                    "monotonicity": {"lo": fmt_rational(&cert.lo), "hi": fmt_rational(&cert.hi), "pieces": cert.pieces.len(), "min_lower_bound": fmt_rational(&cert.min_lower_bound())},
                    "decay": decay,
                }),
            )
        }
        Command::VerifyIdentity { link } => {
            s.inputs.add("order", link.n.to_string());
            s.inputs.add("grid", link.grid.to_string());
            let ctx = gallery::delta_link(link.n, link.grid)?;
            let r = verify_abs_identity(&ctx.franklin, &ctx.link, &link.grid)?;
            summary.push(format!("points checked: {}", r.checked));
            summary.push(format!("  nonpositive (including 0): {}", r.nonpositive));
            summary.push(format!("  positive rationals: {}", r.positive_rational));
            summary.push(format!("  matched preimages: {}", r.matched));
            summary.push("failures: 0".into());
            ("verified".to_string(), json!({"identity": to_value(&r), "failures": 0}))
        }
        Command::Scenario { name, link } => {
            let opts = ScenarioOptions { order: link.n, grid: link.grid };
            s.inputs.add("order", link.n.to_string());
            s.inputs.add("grid", link.grid.to_string());
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => gallery::scenario_names(),
            };
            s.inputs.add("scenarios", names.join(","));
            let mut reports = Vec::new();
            for n in names {
                let r = gallery::run_scenario(n, &opts)?;
                merge(&mut axioms_used, &r.axioms_used);
                summary.push(format!("{}: {}", r.scenario, if r.passed() { "pass" } else { "FAIL" }));
                for c in &r.checks {
                    let cond = if c.axioms_used.is_empty() { String::new() } else { format!(" [{}]", c.axioms_used.join(", ")) };
                    summary.push(format!("  {} {}: {}{cond}", if c.pass { "ok" } else { "FAIL" }, c.claim, c.observed));
                }
                reports.push(r);
            }
            axioms_used.sort();
            let ok = reports.iter().all(|r| r.passed());
            let result = if name.is_some() { to_value(&reports[0]) } else { to_value(&reports) };
            (if ok { "passed" } else { "failed" }.to_string(), result)
        }
        Command::List => {
            for n in gallery::SPACE_NAMES {
                let v = gallery::gallery_space(n)?;
                let gens: Vec<String> = v.generators.iter().map(|g| format!("({})", g.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))).collect();
                summary.push(format!("space {n}: R^{} generated by {}", v.dim, gens.join(", ")));
            }
            for sc in gallery::SCENARIOS {
                summary.push(format!("scenario {}: {}", sc.name, sc.description));
            }
            for a in gallery::axioms() {
                summary.push(format!("axiom {}: {}", a.name, a.statement));
            }
            let spaces: Vec<Value> = gallery::SPACE_NAMES
                .iter()
                .map(|n| json!({"name": n, "text": gallery::gallery_space(n).map(|v| print_space(&v)).unwrap_or_default(), "attached_axioms": gallery::attached_axioms(n)}))
                .collect();
            let scenarios: Vec<Value> = gallery::SCENARIOS.iter().map(|s| json!({"name": s.name, "space": s.space, "description": s.description})).collect();
            ("ok".to_string(), json!({"spaces": spaces, "scenarios": scenarios, "axioms": to_value(&gallery::axioms())}))
        }
    };
    Ok(Report {
        command: command.into(),
        tool_version: TOOL_VERSION,
        inputs_digest: s.inputs.digest(),
        status,
        axioms_used,
        summary,
        result,
        timing_ms: None,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut rep) => {
            if cli.timing {
                rep.timing_ms = Some(start.elapsed().as_millis() as u64);
            }
            print!("{}", rep.render(cli.json));
            if rep.status == "failed" {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
