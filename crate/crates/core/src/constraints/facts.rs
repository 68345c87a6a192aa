use serde::Serialize;

use crate::expr::{AXIOM_GAMMA, AXIOM_SQRT_IMPLICATION};

/// A smoothness fact: a combination `sum_k c_k * atom_k` (plus anything
/// smooth) of the listed atoms is smooth iff every `c_k` vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessFact {
    pub id: &'static str,
    /// Atoms in DSL text; a combination matches when its atoms are a subset.
    pub atoms: &'static [&'static str],
    pub pattern: &'static str,
    pub condition: &'static str,
    pub provenance: &'static str,
    /// Axiom the fact rests on, if any.
    pub axiom: Option<&'static str>,
}

pub const FACTS: &[SmoothnessFact] = &[
    SmoothnessFact {
        id: "abs",
        atoms: &["abs(x)"],
        pattern: "c*abs(x)",
        condition: "c = 0",
        provenance: "one-sided derivatives of abs at 0 are -1 and 1",
        axiom: None,
    },
    SmoothnessFact {
        id: "delta",
        atoms: &["deltaQ(x)"],
        pattern: "c*deltaQ(x)",
        condition: "c = 0",
        provenance: "rationals and irrationals are both dense, so deltaQ is discontinuous everywhere",
        axiom: None,
    },
    SmoothnessFact {
        id: "abs-delta",
        atoms: &["abs(x)", "deltaQ(x)"],
        pattern: "c*abs(x) + d*deltaQ(x)",
        condition: "c = 0, d = 0",
        provenance: "c*abs(x) is continuous, so d*deltaQ(x) must be continuous, forcing d = 0 and then c = 0",
        axiom: None,
    },
    SmoothnessFact {
        id: "delta-sqrt",
        atoms: &["deltaQ(x)", "deltaQ(sqrt(abs(x)))"],
        pattern: "a*deltaQ(x) + b*deltaQ(sqrt(abs(x)))",
        condition: "a = 0, b = 0",
        provenance: "a continuous version is constant a+b by density of irrationals; rationals with irrational root give b, rationals with rational root give 0",
        axiom: None,
    },
    SmoothnessFact {
        id: "gamma-abs",
        atoms: &["gamma(x)", "abs(x)"],
        pattern: "c*gamma(x) + d*abs(x)",
        condition: "c = 0, d = 0",
        provenance: "gamma is not smooth and D_gamma meets D_abs in the standard diffeology",
        axiom: Some(AXIOM_GAMMA),
    },
];

/// Implication facts used when reasoning about subset diffeologies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImplicationFact {
    pub id: &'static str,
    pub statement: &'static str,
    pub axiom: &'static str,
}

pub const IMPLICATIONS: &[ImplicationFact] = &[
    ImplicationFact {
        id: "gamma-abs-coupling",
        statement: "sum h_i*gamma(H_i) = sum f_j*abs(F_j) + smooth forces both sides smooth",
        axiom: AXIOM_GAMMA,
    },
    ImplicationFact {
        id: "sqrt-implication",
        statement: "sum h_i*deltaQ(sqrt(abs(H_i))) smooth implies sum h_i*deltaQ(H_i) smooth",
        axiom: AXIOM_SQRT_IMPLICATION,
    },
];

/// First fact (in table order) whose atoms cover `atoms` and whose axiom,
/// if any, is granted.
pub fn match_fact(atoms: &[String], axioms: &[String]) -> Option<&'static SmoothnessFact> {
    FACTS.iter().find(|f| {
        f.axiom.is_none_or(|a| axioms.iter().any(|g| g == a))
            && atoms.iter().all(|a| f.atoms.contains(&a.as_str()))
    })
}

#[derive(Serialize)]
struct FactTable {
    facts: &'static [SmoothnessFact],
    implications: &'static [ImplicationFact],
}

/// The compiled fact base as JSON, for audit.
pub fn fact_table_json() -> String {
    serde_json::to_string_pretty(&FactTable { facts: FACTS, implications: IMPLICATIONS }).expect("static table serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{classify_smoothness_with, parse_expr, verify_witness, ClassifyContext, SmoothStatus};
    use rand::{Rng, SeedableRng};

    #[test]
    fn matching() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(match_fact(&s(&["abs(x)"]), &[]).unwrap().id, "abs");
        assert_eq!(match_fact(&s(&["deltaQ(x)", "abs(x)"]), &[]).unwrap().id, "abs-delta");
        assert!(match_fact(&s(&["gamma(x)"]), &[]).is_none());
        assert_eq!(match_fact(&s(&["gamma(x)"]), &s(&["A"])).unwrap().id, "gamma-abs");
        assert!(match_fact(&s(&["abs(x-1)"]), &[]).is_none());
    }

    #[test]
    fn table_dumps() {
        let v: serde_json::Value = serde_json::from_str(&fact_table_json()).unwrap();
        assert_eq!(v["facts"].as_array().unwrap().len(), FACTS.len());
        for f in FACTS {
            assert!(!f.provenance.is_empty());
        }
    }

    /// Every fact agrees with the witness-producing classifier on random
    /// concrete coefficients.
    #[test]
    fn facts_agree_with_classifier() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let ctx = ClassifyContext::with_axioms(&[AXIOM_GAMMA]);
        for f in FACTS {
            for _ in 0..10 {
                let cs: Vec<i64> = f.atoms.iter().map(|_| rng.gen_range(-3..=3)).collect();
                let mut text = "x^2".to_string();
                for (c, a) in cs.iter().zip(f.atoms) {
                    text.push_str(&format!("+({c})*{a}"));
                }
                let e = parse_expr(&text).unwrap();
                let v = classify_smoothness_with(&e, &ctx);
                let zero = cs.iter().all(|c| *c == 0);
                let expect = if zero { SmoothStatus::Smooth } else { SmoothStatus::NonSmooth };
                assert_eq!(v.status, expect, "{text}");
                if let Some(w) = &v.witness {
                    verify_witness(&e, w, &ctx).unwrap();
                }
            }
        }
    }
}
