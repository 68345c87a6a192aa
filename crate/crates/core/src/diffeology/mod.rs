//! Finite-dimensional vector spaces carrying the vector space diffeology
//! generated by finitely many one-parameter maps.

mod format;
mod plot;

pub use format::{parse_space, print_space};
pub use plot::{plot_eval, product_space, pushforward, pushforward_space, subset_constraints, Plot, PlotTerm, SubsetCondition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{self, Vector};
use crate::numbers::{fmt_rational, int, QSqrt2, Rational};

/// `R^dim` with the diffeology generated by `generators`. No generators
/// means the standard diffeology.
#[derive(Clone, PartialEq, Debug)]
pub struct DVSpace {
    pub name: String,
    pub dim: usize,
    /// Each generator is a map `R -> R^dim` in the variable `x`.
    pub generators: Vec<Vec<Expr>>,
    pub axioms: Vec<String>,
}

impl DVSpace {
    pub fn new(name: impl Into<String>, dim: usize, generators: Vec<Vec<Expr>>, axioms: Vec<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        for g in &generators {
            if g.len() != dim {
                return Err(Error::Shape(format!("generator has {} coordinates, expected {dim}", g.len())));
            }
            if g.iter().any(|e| e.max_var().is_some_and(|v| v > 0)) {
                return Err(Error::Shape("generators are maps of one variable".into()));
            }
        }
        Ok(DVSpace { name: name.into(), dim, generators, axioms })
    }

    pub fn standard(dim: usize) -> Self {
        DVSpace { name: format!("R{dim}"), dim, generators: vec![], axioms: vec![] }
    }

    pub fn is_declared_standard(&self) -> bool {
        self.generators.is_empty()
    }

    /// The generator `x -> c*atom` written as a vector.
    pub fn generator_vector(&self, i: usize) -> &[Expr] {
        &self.generators[i]
    }
}

/// A linear subspace of `Q^n` (inside `R^n`) given by an independent basis.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Subspace {
    pub ambient: usize,
    #[serde(with = "vectors_as_strings")]
    pub basis: Vec<Vector>,
}

impl Subspace {
    pub fn new(ambient: usize, basis: Vec<Vector>) -> Result<Self> {
        if basis.iter().any(|v| v.len() != ambient) {
            return Err(Error::Shape(format!("basis vectors must have length {ambient}")));
        }
        if linalg::rank(&basis, ambient) != basis.len() {
            return Err(Error::Invalid("basis vectors are linearly dependent".into()));
        }
        Ok(Subspace { ambient, basis })
    }

    /// Span of arbitrary vectors, reduced to a row-echelon basis.
    pub fn span(ambient: usize, vectors: &[Vector]) -> Self {
        let (rows, _) = linalg::rref(vectors, ambient);
        Subspace { ambient, basis: rows }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: vec![] }
    }

    pub fn whole(ambient: usize) -> Self {
        Subspace { ambient, basis: (0..ambient).map(|i| unit(ambient, i)).collect() }
    }

    /// `Span(e_i, ...)` with 1-based indices.
    pub fn coords(ambient: usize, indices: &[usize]) -> Self {
        Subspace { ambient, basis: indices.iter().map(|&i| unit(ambient, i - 1)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        linalg::in_span(&self.basis, v, self.ambient)
    }

    /// Functionals vanishing exactly on this subspace.
    pub fn annihilator(&self) -> Vec<Vector> {
        linalg::nullspace(&self.basis, self.ambient)
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && other.basis.iter().all(|v| self.contains(v))
    }

    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        self.dim() + other.dim() - linalg::rank(&all, self.ambient)
    }

    /// Coordinates of `v` in the stored basis.
    pub fn coordinates(&self, v: &[Rational]) -> Option<Vector> {
        linalg::solve_combination(&self.basis, v, self.ambient)
    }

    /// Parses a spanning set: `0`, `V`, or vectors separated by `;` or by
    /// commas outside parentheses, each `eK` or `(a,b,..)`.
    pub fn parse(ambient: usize, s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "0" | "{0}" => return Ok(Subspace::zero(ambient)),
            "V" => return Ok(Subspace::whole(ambient)),
            _ => {}
        }
        let mut parts = Vec::new();
        let (mut depth, mut start) = (0i32, 0);
        for (i, c) in t.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' | ';' if depth == 0 => {
                    parts.push(&t[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&t[start..]);
        let mut vs = Vec::new();
        for p in parts.iter().map(|p| p.trim()).filter(|p| !p.is_empty()) {
            let v = if let Some(k) = p.strip_prefix('e') {
                let k: usize = k.parse().map_err(|_| Error::Invalid(format!("bad unit vector `{p}`")))?;
                if k == 0 || k > ambient {
                    return Err(Error::Shape(format!("{p} is not a unit vector of R^{ambient}")));
                }
                unit(ambient, k - 1)
            } else {
                parse_vector(p)?
            };
            if v.len() != ambient {
                return Err(Error::Shape(format!("{p} has {} entries, expected {ambient}", v.len())));
            }
            vs.push(v);
        }
        if vs.is_empty() {
            return Err(Error::Invalid(format!("empty spanning set `{s}`")));
        }
        Ok(Subspace::span(ambient, &vs))
    }
}

impl std::fmt::Display for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vs: Vec<String> = self.basis.iter().map(|v| fmt_vector(v)).collect();
        write!(f, "Span({})", vs.join(", "))
    }
}

pub fn unit(n: usize, i: usize) -> Vector {
    (0..n).map(|j| int((i == j) as i64)).collect()
}

pub fn fmt_vector(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rational).collect();
    format!("({})", parts.join(","))
}

pub fn parse_vector(s: &str) -> Result<Vector> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    inner.split(',').map(|p| crate::numbers::parse_rational(p.trim())).collect()
}

mod vectors_as_strings {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(vs: &[Vector], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(vs.iter().map(|v| fmt_vector(v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vector>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter().map(|s| parse_vector(s).map_err(serde::de::Error::custom)).collect()
    }
}

/// A rational `m x n` matrix acting on column vectors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearMap {
    pub rows: Vec<Vector>,
    pub ncols: usize,
}

impl LinearMap {
    pub fn new(rows: Vec<Vector>, ncols: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("ragged matrix".into()));
        }
        Ok(LinearMap { rows, ncols })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap { rows: (0..n).map(|i| unit(n, i)).collect(), ncols: n }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        LinearMap { rows: vec![vec![int(0); n]; m], ncols: n }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, v: &[Rational]) -> Vector {
        self.rows.iter().map(|r| linalg::dot(r, v)).collect()
    }

    /// Applies the matrix to a vector of expressions.
    pub fn apply_exprs(&self, v: &[Expr]) -> Vec<Expr> {
        self.rows
            .iter()
            .map(|r| {
                let mut acc = Expr::zero();
                for (c, e) in r.iter().zip(v) {
                    if !num_traits::Zero::is_zero(c) {
                        acc = acc + Expr::constant(QSqrt2::from_rational(c.clone())) * e.clone();
                    }
                }
                acc.normalize()
            })
            .collect()
    }

    pub fn kernel(&self) -> Subspace {
        Subspace { ambient: self.ncols, basis: linalg::nullspace(&self.rows, self.ncols) }
    }

    pub fn image(&self) -> Subspace {
        let cols: Vec<Vector> = (0..self.ncols).map(|j| self.rows.iter().map(|r| r[j].clone()).collect()).collect();
        Subspace::span(self.nrows(), &cols)
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.rows, self.ncols)
    }

    /// Parses `[[1,0,0],[0,1,0],[0,0,0]]`-style text.
    pub fn parse(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = t
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Invalid(format!("matrix must be written as [[..],..]: {s}")))?;
        let rows: Vec<Vector> = inner
            .split("],")
            .map(|r| r.trim_start_matches('[').trim_end_matches(']'))
            .map(|r| r.split(',').map(crate::numbers::parse_rational).collect::<Result<Vector>>())
            .collect::<Result<_>>()?;
        let n = rows.first().map_or(0, Vec::len);
        LinearMap::new(rows, n)
    }
}

impl std::fmt::Display for LinearMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("[{}]", r.iter().map(fmt_rational).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}
