//! Smoothness fact base and the exact linear algebra of smooth linear
//! functionals: duals, maximal isotropic and characteristic subspaces.

mod facts;

pub use facts::{fact_table_json, match_fact, ImplicationFact, SmoothnessFact, FACTS, IMPLICATIONS};

use num_traits::Zero;
use serde::Serialize;

use crate::diffeology::{fmt_vector, unit, DVSpace, Subspace};
use crate::expr::{decompose, Atom, ClassifyContext};
use crate::linalg::{self, Vector};
use crate::numbers::{QSqrt2, Rational};
use crate::error::{Error, Result};

/// Coefficients of the unknowns `a_1..a_n` in a real-valued expression.
type Form = Vec<QSqrt2>;

/// A rational linear equation `sum_j coeffs[j] * a_j = 0`.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Equation {
    #[serde(serialize_with = "ser_vector")]
    pub coeffs: Vector,
    pub origin: String,
}

fn ser_vector<S: serde::Serializer>(v: &Vector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_vector(v))
}

impl std::fmt::Display for Equation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut out = String::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &Rational::zero();
            let mag = crate::numbers::rational_abs(c);
            let sign = if neg { "-" } else if out.is_empty() { "" } else { "+" };
            let coeff = if mag == Rational::from_integer(1.into()) {
                String::new()
            } else {
                format!("{}*", crate::numbers::fmt_rational(&mag))
            };
            out.push_str(&format!("{sign}{coeff}a{}", j + 1));
        }
        write!(f, "{out} = 0")
    }
}

/// Linear conditions on a functional `f = sum_j a_j e_j^*` for `f` to be
/// smooth on a space.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ConstraintSystem {
    pub unknowns: Vec<String>,
    /// Necessary conditions (and sufficient too when `incomplete` is empty).
    pub equations: Vec<Equation>,
    /// Conditions that suffice for smoothness even where no fact matched.
    #[serde(skip)]
    pub sufficient: Vec<Vector>,
    pub axioms_used: Vec<String>,
    pub incomplete: Vec<String>,
}

impl ConstraintSystem {
    pub fn is_complete(&self) -> bool {
        self.incomplete.is_empty()
    }

    pub fn rows(&self) -> Vec<Vector> {
        self.equations.iter().map(|e| e.coeffs.clone()).collect()
    }

    pub fn solution_space(&self) -> Vec<Vector> {
        linalg::nullspace(&self.rows(), self.unknowns.len())
    }

    fn push(&mut self, coeffs: Vector, origin: String) {
        if linalg::is_zero_vector(&coeffs) {
            return;
        }
        let coeffs = scale_to_monic(coeffs);
        if !self.equations.iter().any(|e| e.coeffs == coeffs) {
            self.equations.push(Equation { coeffs, origin });
        }
    }
}

fn scale_to_monic(v: Vector) -> Vector {
    match v.iter().find(|x| !x.is_zero()).cloned() {
        Some(lead) => v.into_iter().map(|x| x / &lead).collect(),
        None => v,
    }
}

/// Rational and `sqrt2` parts of a form; both must vanish for rational unknowns.
fn split(form: &Form) -> [Vector; 2] {
    [form.iter().map(|c| c.a().clone()).collect(), form.iter().map(|c| c.b().clone()).collect()]
}

/// Collects `f o g` for `f = sum a_j e_j^*` as atoms with linear forms.
fn atom_forms(g: &[crate::expr::Expr]) -> std::result::Result<Vec<(Atom, Form)>, String> {
    let n = g.len();
    let mut out: Vec<(Atom, Form)> = Vec::new();
    for (j, coord) in g.iter().enumerate() {
        let comb = decompose(coord).ok_or_else(|| format!("coordinate {coord} is not a combination of exotic atoms"))?;
        for (h, atom) in comb.atoms {
            let c = h.as_const().cloned().ok_or_else(|| format!("non-constant coefficient {h} of {}", atom.to_expr()))?;
            let slot = match out.iter().position(|(a, _)| *a == atom) {
                Some(i) => i,
                None => {
                    out.push((atom, vec![QSqrt2::zero(); n]));
                    out.len() - 1
                }
            };
            out[slot].1[j] = &out[slot].1[j] + &c;
        }
    }
    Ok(out)
}

fn all_axioms(v: &DVSpace, ctx: &ClassifyContext) -> Vec<String> {
    let mut ax = ctx.axioms.clone();
    for a in &v.axioms {
        if !ax.contains(a) {
            ax.push(a.clone());
        }
    }
    ax
}

/// Conditions for `sum_j a_j e_j^*` to be smooth, one fact per generator.
pub fn functional_constraints(v: &DVSpace, ctx: &ClassifyContext) -> ConstraintSystem {
    let n = v.dim;
    let axioms = all_axioms(v, ctx);
    let mut sys = ConstraintSystem {
        unknowns: (1..=n).map(|j| format!("a{j}")).collect(),
        equations: vec![],
        sufficient: vec![],
        axioms_used: vec![],
        incomplete: vec![],
    };
    for (i, g) in v.generators.iter().enumerate() {
        let label = format!("generator {}", i + 1);
        match atom_forms(g) {
            Ok(forms) => {
                for (_, form) in &forms {
                    for row in split(form) {
                        if !linalg::is_zero_vector(&row) {
                            sys.sufficient.push(row);
                        }
                    }
                }
                let live: Vec<&(Atom, Form)> = forms.iter().filter(|(_, f)| f.iter().any(|c| !c.is_zero())).collect();
                if live.is_empty() {
                    continue;
                }
                let names: Vec<String> = live.iter().map(|(a, _)| a.to_expr().to_string()).collect();
                match match_fact(&names, &axioms) {
                    Some(fact) => {
                        if let Some(ax) = fact.axiom {
                            if !sys.axioms_used.iter().any(|a| a == ax) {
                                sys.axioms_used.push(ax.to_string());
                            }
                        }
                        for (atom, form) in live {
                            for row in split(form) {
                                sys.push(row, format!("{label}: fact {} on {}", fact.id, atom.to_expr()));
                            }
                        }
                    }
                    None => sys.incomplete.push(format!("{label}: no fact covers {}", names.join(", "))),
                }
            }
            Err(why) => {
                sys.incomplete.push(format!("{label}: {why}"));
                for (j, coord) in g.iter().enumerate() {
                    if coord.contains_nonsmooth() {
                        sys.sufficient.push(unit(n, j));
                    }
                }
            }
        }
    }
    sys
}

/// The smooth dual `V*`, exactly when the fact base decides it.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Dual {
    pub exact: bool,
    pub dim_lower: usize,
    pub dim_upper: usize,
    /// Basis of `V*` when exact, otherwise of the necessary-condition space.
    #[serde(serialize_with = "ser_vectors")]
    pub basis: Vec<Vector>,
    pub system: ConstraintSystem,
}

fn ser_vectors<S: serde::Serializer>(vs: &[Vector], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(vs.iter().map(|v| fmt_vector(v)))
}

impl Dual {
    pub fn dim(&self) -> Option<usize> {
        self.exact.then_some(self.dim_upper)
    }
}

pub fn dual_basis(v: &DVSpace, ctx: &ClassifyContext) -> Dual {
    let system = functional_constraints(v, ctx);
    let basis = system.solution_space();
    let upper = basis.len();
    let lower = linalg::nullspace(&system.sufficient, v.dim).len().min(upper);
    Dual { exact: lower == upper, dim_lower: lower, dim_upper: upper, basis, system }
}

/// Common kernel of all smooth linear functionals.
pub fn maximal_isotropic(v: &DVSpace, ctx: &ClassifyContext) -> Result<Subspace> {
    let dual = dual_basis(v, ctx);
    if !dual.exact {
        return Err(Error::Undetermined(format!(
            "dual dimension is between {} and {}: {}",
            dual.dim_lower,
            dual.dim_upper,
            dual.system.incomplete.join("; ")
        )));
    }
    Ok(isotropic_from_dual(v.dim, &dual.basis))
}

pub fn isotropic_from_dual(n: usize, dual: &[Vector]) -> Subspace {
    Subspace { ambient: n, basis: linalg::nullspace(dual, n) }
}

/// Trusted theorem used by characteristic decompositions.
pub const DUAL_DIM_THEOREM: &str = "thm:dual-dim-characteristic";

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct CharacteristicDecomposition {
    /// Complement of the isotropic subspace on which the dual restricts to an isomorphism.
    pub v0: Subspace,
    /// The maximal isotropic subspace.
    pub v1: Subspace,
    pub dual_dim: usize,
    pub pivot_columns: Vec<usize>,
    pub degenerate: bool,
    pub trusted: Vec<String>,
    pub axioms_used: Vec<String>,
}

/// `V = V0 + V1` with `V1` maximal isotropic and `V0` spanned by the
/// coordinate vectors at the pivot columns of the reduced dual basis.
pub fn characteristic_decomposition(v: &DVSpace, ctx: &ClassifyContext) -> Result<CharacteristicDecomposition> {
    let dual = dual_basis(v, ctx);
    if !dual.exact {
        return Err(Error::Undetermined("dual is not determined by the fact base".into()));
    }
    let (rows, pivots) = linalg::rref(&dual.basis, v.dim);
    let v0 = Subspace { ambient: v.dim, basis: pivots.iter().map(|&p| unit(v.dim, p)).collect() };
    let v1 = isotropic_from_dual(v.dim, &dual.basis);
    debug_assert_eq!(rows.len(), v0.dim());
    Ok(CharacteristicDecomposition {
        degenerate: v0.dim() == 0,
        dual_dim: v0.dim(),
        v0,
        v1,
        pivot_columns: pivots,
        trusted: vec![DUAL_DIM_THEOREM.into()],
        axioms_used: dual.system.axioms_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{classify_smoothness_with, parse_expr, Expr, SmoothStatus};
    use crate::numbers::int;
    use rand::{Rng, SeedableRng};

    fn space(dim: usize, gens: &[&[&str]], axioms: &[&str]) -> DVSpace {
        let g = gens.iter().map(|g| g.iter().map(|s| parse_expr(s).unwrap()).collect()).collect();
        DVSpace::new("t", dim, g, axioms.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn eqs(sys: &ConstraintSystem) -> Vec<String> {
        sys.equations.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn constraint_examples() {
        let ctx = ClassifyContext::default();
        let v2 = space(2, &[&["abs(x)", "abs(x)"], &["0", "deltaQ(x)"]], &[]);
        assert_eq!(eqs(&functional_constraints(&v2, &ctx)), ["a1+a2 = 0", "a2 = 0"]);
        let r3 = space(3, &[&["0", "abs(x)", "abs(x)"]], &[]);
        assert_eq!(eqs(&functional_constraints(&r3, &ctx)), ["a2+a3 = 0"]);
        let w = space(2, &[&["abs(x)", "gamma(x)"]], &["A"]);
        let sys = functional_constraints(&w, &ctx);
        assert_eq!(eqs(&sys), ["a1 = 0", "a2 = 0"]);
        assert_eq!(sys.axioms_used, vec!["A".to_string()]);
        let unaxiomatized = space(2, &[&["abs(x)", "gamma(x)"]], &[]);
        assert!(!functional_constraints(&unaxiomatized, &ctx).is_complete());
    }

    #[test]
    fn dual_examples() {
        let ctx = ClassifyContext::default();
        let v2 = space(2, &[&["abs(x)", "abs(x)"], &["0", "deltaQ(x)"]], &[]);
        assert_eq!(dual_basis(&v2, &ctx).dim(), Some(0));
        assert!(maximal_isotropic(&v2, &ctx).unwrap().same_as(&Subspace::whole(2)));
        let r3 = space(3, &[&["0", "abs(x)", "abs(x)"]], &[]);
        let d = dual_basis(&r3, &ctx);
        assert_eq!(d.dim(), Some(2));
        assert_eq!(d.basis, vec![vec![int(1), int(0), int(0)], vec![int(0), int(1), int(-1)]]);
        let iso = maximal_isotropic(&r3, &ctx).unwrap();
        assert!(iso.same_as(&Subspace::span(3, &[vec![int(0), int(1), int(1)]])));
        assert_eq!(dual_basis(&DVSpace::standard(4), &ctx).dim(), Some(4));
        let sd = space(2, &[&["deltaQ(x)", "deltaQ(sqrt(abs(x)))"]], &[]);
        assert!(maximal_isotropic(&sd, &ctx).unwrap().same_as(&Subspace::whole(2)));
    }

    #[test]
    fn bounds_when_incomplete() {
        let ctx = ClassifyContext::default();
        let v = space(3, &[&["gamma(x)", "0", "0"], &["0", "abs(x)", "0"]], &[]);
        let d = dual_basis(&v, &ctx);
        assert!(!d.exact);
        assert_eq!((d.dim_lower, d.dim_upper), (1, 2));
        assert!(maximal_isotropic(&v, &ctx).is_err());
        // upper bound zero settles the dual regardless
        let v = space(1, &[&["abs(x)"], &["abs(x)*deltaQ(x)"]], &[]);
        let d = dual_basis(&v, &ctx);
        assert!(d.exact && d.dim() == Some(0));
    }

    #[test]
    fn characteristic_examples() {
        let ctx = ClassifyContext::default();
        let r3 = space(3, &[&["0", "abs(x)", "abs(x)"]], &[]);
        let c = characteristic_decomposition(&r3, &ctx).unwrap();
        assert!(c.v0.same_as(&Subspace::coords(3, &[1, 2])));
        assert!(c.v1.same_as(&Subspace::span(3, &[vec![int(0), int(1), int(1)]])));
        let s = characteristic_decomposition(&DVSpace::standard(3), &ctx).unwrap();
        assert!(s.v0.same_as(&Subspace::whole(3)) && s.v1.dim() == 0);
        let v2 = space(2, &[&["abs(x)", "abs(x)"], &["0", "deltaQ(x)"]], &[]);
        let c = characteristic_decomposition(&v2, &ctx).unwrap();
        assert!(c.degenerate && c.v1.same_as(&Subspace::whole(2)));
    }

    fn compose(f: &[Rational], g: &[Expr]) -> Expr {
        crate::diffeology::LinearMap { rows: vec![f.to_vec()], ncols: f.len() }.apply_exprs(g).remove(0)
    }

    /// Dual functionals compose to smooth maps; random functionals outside
    /// the dual break some generator, with a replayable witness.
    #[test]
    fn dual_against_classifier() {
        let ctx = ClassifyContext::with_axioms(&["A"]);
        let spaces = [
            space(2, &[&["abs(x)", "abs(x)"], &["0", "deltaQ(x)"]], &[]),
            space(3, &[&["0", "abs(x)", "abs(x)"]], &[]),
            space(2, &[&["gamma(x)", "gamma(x)"], &["0", "abs(x)"]], &["A"]),
            space(2, &[&["deltaQ(x)", "deltaQ(sqrt(abs(x)))"]], &[]),
            space(3, &[&["abs(x)", "deltaQ(x)", "0"], &["0", "abs(x)", "abs(x)"]], &[]),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for v in &spaces {
            let d = dual_basis(v, &ctx);
            assert!(d.exact);
            for f in &d.basis {
                for g in &v.generators {
                    assert_eq!(classify_smoothness_with(&compose(f, g), &ctx).status, SmoothStatus::Smooth);
                }
            }
            for _ in 0..20 {
                let f: Vector = (0..v.dim).map(|_| int(rng.gen_range(-3..=3))).collect();
                if linalg::in_span(&d.basis, &f, v.dim) {
                    continue;
                }
                let broken = v.generators.iter().any(|g| {
                    let e = compose(&f, g);
                    let verdict = classify_smoothness_with(&e, &ctx);
                    verdict.status == SmoothStatus::NonSmooth
                        && crate::expr::verify_witness(&e, verdict.witness.as_ref().unwrap(), &ctx).is_ok()
                });
                assert!(broken, "{f:?}");
            }
        }
    }
}
