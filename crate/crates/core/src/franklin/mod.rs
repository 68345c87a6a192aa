//! Truncated back-and-forth construction of a monotone polynomial map of
//! `(0,1)` sending the first unit rationals onto points `w^-1(q)` with `q`
//! rational in `(1/sqrt2, 1)`, and everything built on it: `H1`, `H2`, the
//! rationality link and the `|x|` identity.

mod interval;
mod link;

pub use interval::Interval;
pub use link::{
    build_h1, build_h2, certify_rationality_link, identity_expr, piecewise_via_delta, verify_abs_identity, verify_branches,
    BranchCheck, Grid, IdentityReport, SamplePoint,
};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{w_exact, w_inverse};
use crate::numbers::{fmt_rational, int, rat, rational_to_f64, simplest_between, QSqrt2, Rational};

pub const DEFAULT_ORDER: usize = 16;

/// Deterministic enumeration of `(0,1) ∩ Q`: by denominator, then numerator.
pub fn unit_rationals() -> impl Iterator<Item = Rational> {
    (2i64..).flat_map(|d| (1..d).filter(move |&p| gcd(p, d) == 1).map(move |p| rat(p, d)))
}

/// Deterministic enumeration of `(1/sqrt2, 1) ∩ Q`: by denominator, then numerator.
pub fn target_rationals() -> impl Iterator<Item = Rational> {
    (2i64..).flat_map(|d| (1..d).filter(move |&p| gcd(p, d) == 1 && 2 * p * p > d * d).map(move |p| rat(p, d)))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Enumeration {
    pub rule: &'static str,
    pub values: Vec<QSqrt2>,
}

pub fn enumerate_unit_rationals(n: usize) -> Enumeration {
    Enumeration {
        rule: "(0,1) rationals by denominator, then numerator",
        values: unit_rationals().take(n).map(QSqrt2::from_rational).collect(),
    }
}

/// `b_j = w^-1(q_j) = (2q_j - 1) + (q_j - 1) sqrt2`.
pub fn target_points(n: usize) -> Enumeration {
    Enumeration {
        rule: "w^-1 of (1/sqrt2,1) rationals by denominator, then numerator",
        values: target_rationals().take(n).map(|q| w_inverse(&QSqrt2::from_rational(q))).collect(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forth,
    Back,
}

/// `coeff * prod (x - r)` over `roots`.
#[derive(Clone, PartialEq, Debug)]
pub struct Correction {
    pub coeff: QSqrt2,
    pub roots: Vec<Rational>,
}

impl Correction {
    pub fn basis_at(&self, x: &Rational) -> Rational {
        self.roots.iter().fold(Rational::one(), |acc, r| acc * (x - r))
    }

    fn basis_at_exact(&self, x: &QSqrt2) -> QSqrt2 {
        self.roots.iter().fold(QSqrt2::one(), |acc, r| acc * (x - &QSqrt2::from_rational(r.clone())))
    }

    /// Upper bound of `|prod (x - r)|` on `[0,1]`.
    pub fn sup_bound(&self) -> Rational {
        self.roots.iter().filter(|r| !r.is_zero() && !r.is_one()).fold(rat(1, 4), |acc, r| acc * factor_max(r))
    }

    /// Upper bound of the derivative of `prod (x - r)` on `[0,1]`.
    pub fn derivative_bound(&self) -> Rational {
        let ms: Vec<Rational> = self.roots.iter().map(factor_max).collect();
        (0..ms.len())
            .map(|i| ms.iter().enumerate().filter(|(j, _)| *j != i).fold(Rational::one(), |acc, (_, m)| acc * m))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Enclosure of the derivative of `prod (x - r)` over `x ∈ [lo, hi]`.
    fn derivative_enclosure(&self, x: &Interval) -> Interval {
        let factors: Vec<Interval> = self.roots.iter().map(|r| x.shift(&-r.clone())).collect();
        let mut sum = Interval::point(Rational::zero());
        for i in 0..factors.len() {
            let mut prod = Interval::point(Rational::one());
            for (j, f) in factors.iter().enumerate() {
                if j != i {
                    prod = &prod * f;
                }
            }
            sum = &sum + &prod;
        }
        sum
    }
}

/// `max |x - r|` over `x ∈ [0,1]` for `r ∈ [0,1]`.
fn factor_max(r: &Rational) -> Rational {
    let other = Rational::one() - r;
    if *r > other { r.clone() } else { other }
}

#[derive(Clone, PartialEq, Debug)]
pub struct MatchedPair {
    pub a: Rational,
    pub q: Rational,
    pub b: QSqrt2,
    pub step: usize,
    pub direction: Direction,
}

/// Lower bounds of `f'` on consecutive pieces of the certified region.
#[derive(Clone, PartialEq, Debug)]
pub struct MonotonicityCertificate {
    pub lo: Rational,
    pub hi: Rational,
    pub pieces: Vec<(Rational, Rational, Rational)>,
    pub enclosure_bits: u32,
}

impl MonotonicityCertificate {
    pub fn min_lower_bound(&self) -> Rational {
        self.pieces.iter().map(|p| p.2.clone()).min().unwrap_or_else(Rational::zero)
    }
}

/// `f_N(x) = x + sum_n c_n p_n(x)` with `p_n` vanishing at `0`, `1` and all
/// previously matched sources.
#[derive(Clone, PartialEq, Debug)]
pub struct FranklinMap {
    pub order: usize,
    pub corrections: Vec<Correction>,
    pub pairs: Vec<MatchedPair>,
    /// Exact lower bound of `f_N'` on `[0,1]` kept through the construction.
    pub derivative_floor: QSqrt2,
    pub certificate: MonotonicityCertificate,
}

impl FranklinMap {
    pub fn eval_rational(&self, x: &Rational) -> QSqrt2 {
        self.corrections.iter().fold(QSqrt2::from_rational(x.clone()), |acc, c| {
            acc + &c.coeff * &QSqrt2::from_rational(c.basis_at(x))
        })
    }

    pub fn eval(&self, x: &QSqrt2) -> QSqrt2 {
        self.corrections.iter().fold(x.clone(), |acc, c| acc + &c.coeff * &c.basis_at_exact(x))
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.corrections.iter().fold(x, |acc, c| {
            acc + c.coeff.to_f64() * c.roots.iter().fold(1.0, |p, r| p * (x - rational_to_f64(r)))
        })
    }

    /// `w(f(a))` for a matched source `a`.
    pub fn matched_value(&self, a: &Rational) -> Option<&Rational> {
        self.pairs.iter().find(|p| p.a == *a).map(|p| &p.q)
    }
}

struct Builder {
    corrections: Vec<Correction>,
    pairs: Vec<MatchedPair>,
    floor: QSqrt2,
}

impl Builder {
    fn eval(&self, x: &Rational) -> QSqrt2 {
        self.corrections.iter().fold(QSqrt2::from_rational(x.clone()), |acc, c| {
            acc + &c.coeff * &QSqrt2::from_rational(c.basis_at(x))
        })
    }

    fn next_basis(&self) -> Correction {
        let mut roots = vec![Rational::zero(), Rational::one()];
        roots.extend(self.pairs.iter().map(|p| p.a.clone()));
        Correction { coeff: QSqrt2::zero(), roots }
    }

    /// Matched neighbours `(a, f(a))` below and above, by source order.
    fn neighbours_by_source(&self, a: &Rational) -> ((Rational, QSqrt2), (Rational, QSqrt2)) {
        let mut lo = (Rational::zero(), QSqrt2::zero());
        let mut hi = (Rational::one(), QSqrt2::one());
        for p in &self.pairs {
            if p.a < *a && p.a > lo.0 {
                lo = (p.a.clone(), p.b.clone());
            }
            if p.a > *a && p.a < hi.0 {
                hi = (p.a.clone(), p.b.clone());
            }
        }
        (lo, hi)
    }

    fn neighbours_by_target(&self, b: &QSqrt2) -> (Rational, Rational) {
        let mut lo = (Rational::zero(), QSqrt2::zero());
        let mut hi = (Rational::one(), QSqrt2::one());
        for p in &self.pairs {
            if p.b < *b && p.b > lo.1 {
                lo = (p.a.clone(), p.b.clone());
            }
            if p.b > *b && p.b < hi.1 {
                hi = (p.a.clone(), p.b.clone());
            }
        }
        (lo.0, hi.0)
    }

    /// Largest admissible `|c_n|` for the step `n`, as a rational, halved for slack.
    fn coefficient_budget(&self, n: usize, basis: &Correction) -> Rational {
        let scale = Rational::new(1.into(), num_bigint::BigInt::one() << n);
        let floor_lo = self.floor.enclosure(64).0;
        let decay = &scale / basis.sup_bound();
        let slope = &scale * floor_lo / (int(2) * basis.derivative_bound());
        let m = if decay < slope { decay } else { slope };
        m / int(2)
    }

    fn admissible(&self, n: usize, c: &QSqrt2, basis: &Correction) -> bool {
        let scale = QSqrt2::from_rational(Rational::new(1.into(), num_bigint::BigInt::one() << n));
        let abs = c.abs();
        let decay_ok = &abs * &QSqrt2::from_rational(basis.sup_bound()) <= scale;
        let slope = &abs * &QSqrt2::from_rational(basis.derivative_bound());
        let slope_ok = slope < &scale * &self.floor * QSqrt2::from_rational(rat(1, 2));
        decay_ok && slope_ok
    }

    fn commit(&mut self, n: usize, mut basis: Correction, a: Rational, q: Rational, dir: Direction) -> Result<()> {
        let b = w_inverse(&QSqrt2::from_rational(q.clone()));
        let pa = basis.basis_at(&a);
        let c = (&b - &self.eval(&a)).checked_div(&QSqrt2::from_rational(pa))?;
        if !self.admissible(n, &c, &basis) {
            return Err(Error::Internal(format!("step {n}: coefficient {c} is not admissible")));
        }
        self.floor = &self.floor - &(c.abs() * QSqrt2::from_rational(basis.derivative_bound()));
        basis.coeff = c;
        self.corrections.push(basis);
        self.pairs.push(MatchedPair { a, q, b, step: n, direction: dir });
        Ok(())
    }

    fn forth(&mut self, n: usize) -> Result<()> {
        let a = unit_rationals().find(|a| !self.pairs.iter().any(|p| p.a == *a)).expect("infinite");
        let basis = self.next_basis();
        let ((_, b_lo), (_, b_hi)) = self.neighbours_by_source(&a);
        let y = self.eval(&a);
        let mut eps = QSqrt2::from_rational(self.coefficient_budget(n, &basis) * basis.basis_at(&a).abs());
        for _ in 0..64 {
            let lo = std::cmp::max(&y - &eps, b_lo.clone());
            let hi = std::cmp::min(&y + &eps, b_hi.clone());
            if let Some(q) = simplest_inside(&w_exact(&lo), &w_exact(&hi)) {
                let b = w_inverse(&QSqrt2::from_rational(q.clone()));
                let c = (&b - &y).checked_div(&QSqrt2::from_rational(basis.basis_at(&a)))?;
                if self.admissible(n, &c, &basis) {
                    return self.commit(n, basis, a, q, Direction::Forth);
                }
            }
            eps = &eps * &QSqrt2::from_rational(rat(1, 2));
        }
        Err(Error::Internal(format!("step {n}: no admissible target for {}", fmt_rational(&a))))
    }

    fn back(&mut self, n: usize) -> Result<()> {
        let q = target_rationals().find(|q| !self.pairs.iter().any(|p| p.q == *q)).expect("infinite");
        let b = w_inverse(&QSqrt2::from_rational(q.clone()));
        let basis = self.next_basis();
        let (mut lo, mut hi) = self.neighbours_by_target(&b);
        for _ in 0..4096 {
            let a = simplest_between(&lo, &hi);
            let c = (&b - &self.eval(&a)).checked_div(&QSqrt2::from_rational(basis.basis_at(&a)))?;
            if self.admissible(n, &c, &basis) {
                return self.commit(n, basis, a, q, Direction::Back);
            }
            let mid = (&lo + &hi) / int(2);
            if self.eval(&mid) < b {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Internal(format!("step {n}: no admissible source for target {}", fmt_rational(&q))))
    }
}

/// Simplest rational strictly inside `(lo, hi)` for `lo < hi` in `Q(sqrt2)`.
fn simplest_inside(lo: &QSqrt2, hi: &QSqrt2) -> Option<Rational> {
    if lo >= hi {
        return None;
    }
    let mut bits = 64;
    loop {
        let l = lo.enclosure(bits).1;
        let h = hi.enclosure(bits).0;
        if l < h {
            return Some(simplest_between(&l, &h));
        }
        bits *= 2;
        if bits > 1 << 16 {
            return None;
        }
    }
}

/// Runs `order` alternating steps, starting with a forward one.
pub fn build_franklin(order: usize) -> Result<FranklinMap> {
    if order == 0 {
        return Err(Error::Invalid("truncation order must be at least 1".into()));
    }
    let mut b = Builder { corrections: vec![], pairs: vec![], floor: QSqrt2::one() };
    for n in 1..=order {
        if n % 2 == 1 {
            b.forth(n)?;
        } else {
            b.back(n)?;
        }
    }
    let mut f = FranklinMap {
        order,
        corrections: b.corrections,
        pairs: b.pairs,
        derivative_floor: b.floor,
        certificate: MonotonicityCertificate { lo: rat(1, 100), hi: rat(99, 100), pieces: vec![], enclosure_bits: 64 },
    };
    f.certificate = monotonicity_certificate(&f, rat(1, 100), rat(99, 100), 98);
    Ok(f)
}

/// Interval enclosure of `f'` on `pieces` equal subintervals of `[lo, hi]`.
pub fn monotonicity_certificate(f: &FranklinMap, lo: Rational, hi: Rational, pieces: usize) -> MonotonicityCertificate {
    let bits = 64;
    let width = (&hi - &lo) / int(pieces as i64);
    let coeffs: Vec<Interval> = f
        .corrections
        .iter()
        .map(|c| {
            let (l, h) = c.coeff.enclosure(bits);
            Interval::new(l, h)
        })
        .collect();
    let out = (0..pieces)
        .map(|k| {
            let u = &lo + &width * int(k as i64);
            let v = &u + &width;
            let x = Interval::new(u.clone(), v.clone());
            let mut d = Interval::point(Rational::one());
            for (c, corr) in coeffs.iter().zip(&f.corrections) {
                d = &d + &(c * &corr.derivative_enclosure(&x));
            }
            (u, v, d.lo)
        })
        .collect();
    MonotonicityCertificate { lo, hi, pieces: out, enclosure_bits: bits }
}

/// Replays every stored claim of the construction.
pub fn verify_franklin(f: &FranklinMap) -> Result<()> {
    let fail = |m: String| Err(Error::Verification(m));
    for p in &f.pairs {
        if f.eval_rational(&p.a) != p.b {
            return fail(format!("f({}) != {}", fmt_rational(&p.a), p.b));
        }
        if w_exact(&p.b) != QSqrt2::from_rational(p.q.clone()) {
            return fail(format!("w({}) != {}", p.b, fmt_rational(&p.q)));
        }
    }
    let mut sorted: Vec<&MatchedPair> = f.pairs.iter().collect();
    sorted.sort_by(|x, y| x.a.cmp(&y.a));
    if sorted.windows(2).any(|w| w[0].b >= w[1].b) {
        return fail("matching is not order preserving".into());
    }
    let mut floor = QSqrt2::one();
    for (k, c) in f.corrections.iter().enumerate() {
        let n = k + 1;
        let scale = QSqrt2::from_rational(Rational::new(1.into(), num_bigint::BigInt::one() << n));
        if &c.coeff.abs() * &QSqrt2::from_rational(c.sup_bound()) > scale {
            return fail(format!("correction {n} violates the decay bound"));
        }
        let slope = &c.coeff.abs() * &QSqrt2::from_rational(c.derivative_bound());
        if slope >= &scale * &floor * QSqrt2::from_rational(rat(1, 2)) {
            return fail(format!("correction {n} violates the slope bound"));
        }
        floor = &floor - &slope;
    }
    if floor != f.derivative_floor || !floor.is_positive() {
        return fail("derivative floor does not replay".into());
    }
    let replay = monotonicity_certificate(f, f.certificate.lo.clone(), f.certificate.hi.clone(), f.certificate.pieces.len());
    if replay != f.certificate || !replay.min_lower_bound().is_positive() {
        return fail("monotonicity certificate does not replay".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerations() {
        let a = enumerate_unit_rationals(100);
        assert_eq!(&a.values[..3], &[rat(1, 2), rat(1, 3), rat(2, 3)].map(QSqrt2::from_rational));
        let mut seen = std::collections::HashSet::new();
        for v in &a.values {
            assert!(v.is_positive() && *v < QSqrt2::one());
            assert!(seen.insert(v.clone()));
        }
        let q: Vec<Rational> = target_rationals().take(5).collect();
        assert_eq!(q, vec![rat(3, 4), rat(4, 5), rat(5, 6), rat(5, 7), rat(6, 7)]);
        let b = target_points(200);
        assert_eq!(b.values[0], QSqrt2::new(rat(1, 2), rat(-1, 4)));
        for (bj, qj) in b.values.iter().zip(target_rationals()) {
            assert!(bj.is_positive() && *bj < QSqrt2::one());
            assert_eq!(w_exact(bj), QSqrt2::from_rational(qj));
        }
    }

    #[test]
    fn first_step_hits_target() {
        let f = build_franklin(1).unwrap();
        let p = &f.pairs[0];
        assert_eq!(p.a, rat(1, 2));
        assert_eq!(f.eval_rational(&p.a), p.b);
        verify_franklin(&f).unwrap();
    }

    #[test]
    fn small_orders_verify() {
        for n in 1..=8 {
            let f = build_franklin(n).unwrap();
            assert_eq!(f.pairs.len(), n);
            verify_franklin(&f).unwrap();
        }
    }

    #[test]
    fn derivative_bound_is_an_upper_bound() {
        let c = Correction { coeff: QSqrt2::one(), roots: vec![rat(0, 1), rat(1, 1), rat(1, 3), rat(3, 4)] };
        for k in 0..=200 {
            let x = rat(k, 200);
            let d = c.derivative_enclosure(&Interval::point(x.clone()));
            assert!(d.hi <= c.derivative_bound() && -d.lo.clone() <= c.derivative_bound());
            assert!(c.basis_at(&x).abs() <= c.sup_bound());
        }
    }

    #[test]
    fn tampering_is_detected() {
        let mut f = build_franklin(4).unwrap();
        f.pairs[1].q = rat(7, 8);
        assert!(verify_franklin(&f).is_err());
    }
}
