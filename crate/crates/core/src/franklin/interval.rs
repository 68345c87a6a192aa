//! Closed rational intervals, enough for enclosing polynomial derivatives.

use std::ops::{Add, Mul};

use crate::numbers::Rational;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn shift(&self, by: &Rational) -> Self {
        Interval { lo: &self.lo + by, hi: &self.hi + by }
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, o: &Interval) -> Interval {
        let ps = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = ps.iter().min().expect("nonempty").clone();
        let hi = ps.iter().max().expect("nonempty").clone();
        Interval { lo, hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::rat;

    #[test]
    fn products_enclose_pointwise_products() {
        let a = Interval::new(rat(-1, 2), rat(1, 3));
        let b = Interval::new(rat(-2, 1), rat(-1, 5));
        let p = &a * &b;
        for x in [rat(-1, 2), rat(0, 1), rat(1, 3)] {
            for y in [rat(-2, 1), rat(-1, 5)] {
                let v = &x * &y;
                assert!(p.lo <= v && v <= p.hi);
            }
        }
        assert_eq!(p, Interval::new(rat(-2, 3), rat(1, 1)));
    }
}
