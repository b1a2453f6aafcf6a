//! Closed enclosures `[lo, hi]`: exact over the rationals, outward-rounded
//! over `f64`.

use std::ops::{Add, Mul};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, ratstr};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "ratstr")]
    pub lo: BigRational,
    #[serde(with = "ratstr")]
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval with lo > hi");
        Interval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_negative() {
            Interval::new(&self.hi * c, &self.lo * c)
        } else {
            Interval::new(&self.lo * c, &self.hi * c)
        }
    }

    /// Subtracts an exact value and clamps at zero (for sums of nonnegative
    /// terms).
    pub fn minus_clamped(&self, c: &BigRational) -> Self {
        let z = BigRational::zero();
        let lo = (&self.lo - c).max(z.clone());
        let hi = (&self.hi - c).max(z);
        Interval::new(lo, hi)
    }

    pub fn to_float(&self) -> FloatInterval {
        FloatInterval::new(
            rational::to_f64(&self.lo).next_down(),
            rational::to_f64(&self.hi).next_up(),
        )
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }
}

/// Product of enclosures of nonnegative quantities.
impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, o: &Interval) -> Interval {
        debug_assert!(!self.lo.is_negative() && !o.lo.is_negative());
        Interval::new(&self.lo * &o.lo, &self.hi * &o.hi)
    }
}

/// `[lo, hi]` over `f64`; every operation rounds one ulp outward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatInterval {
    pub lo: f64,
    pub hi: f64,
}

// by-value interval ops; the names mirror the arithmetic they enclose
#[allow(clippy::should_implement_trait)]
impl FloatInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "float interval with lo > hi: [{lo}, {hi}]");
        FloatInterval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        FloatInterval { lo: x, hi: x }
    }

    /// Encloses a value computed with a few roundings.
    pub fn around(x: f64) -> Self {
        FloatInterval { lo: x.next_down(), hi: x.next_up() }
    }

    pub fn with_error(x: f64, err: f64) -> Self {
        FloatInterval { lo: (x - err).next_down(), hi: (x + err).next_up() }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn add(self, o: FloatInterval) -> Self {
        FloatInterval { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }

    pub fn sub(self, o: FloatInterval) -> Self {
        FloatInterval { lo: (self.lo - o.hi).next_down(), hi: (self.hi - o.lo).next_up() }
    }

    pub fn mul(self, o: FloatInterval) -> Self {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        FloatInterval { lo: lo.next_down(), hi: hi.next_up() }
    }

    /// Division by an interval of positive numbers.
    pub fn div_pos(self, o: FloatInterval) -> Self {
        assert!(o.lo > 0.0, "divisor interval must be positive");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        FloatInterval { lo: lo.next_down(), hi: hi.next_up() }
    }

    pub fn hull(self, o: FloatInterval) -> Self {
        FloatInterval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn powi(self, k: i32) -> Self {
        (0..k).fold(FloatInterval::point(1.0), |acc, _| acc.mul(self))
    }
}

/// Outward enclosure of pi.
pub fn pi() -> FloatInterval {
    FloatInterval::around(std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn rational_ops() {
        let a = Interval::new(rat(1, 3), rat(1, 2));
        let b = Interval::point(rat(2, 1));
        assert_eq!(&a * &b, Interval::new(rat(2, 3), rat(1, 1)));
        assert_eq!((&a + &b).width(), rat(1, 6));
        assert_eq!(a.minus_clamped(&rat(5, 12)), Interval::new(rat(0, 1), rat(1, 12)));
        let f = a.to_float();
        assert!(f.lo < 1.0 / 3.0 && f.hi > 0.5);
    }

    #[test]
    fn float_ops_enclose() {
        let x = FloatInterval::around(0.1);
        let y = x.mul(x).add(x).div_pos(FloatInterval::around(3.0));
        let v = (0.1 * 0.1 + 0.1) / 3.0;
        assert!(y.contains(v));
        assert!(pi().contains(std::f64::consts::PI));
        assert!(pi().powi(2).lo < 9.87 && pi().powi(2).hi > 9.869);
    }
}
