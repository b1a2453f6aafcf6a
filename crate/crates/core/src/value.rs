//! Weight values that stay exact for as long as the formula allows.
//!
//! A value is `coef * prod b_i^{e_i} * e^{lin} * e^{fl}` with rational
//! `coef`, `b_i`, `e_i`, `lin` and a float log-part `fl`. Rational powers
//! that happen to be perfect are folded into `coef`; ratios of values with
//! the same symbolic shape cancel exactly. Only the float part forces an
//! approximate comparison (relative margin `1e-12` on the log scale).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, fmt_rational};

/// Relative log-scale margin used when a comparison needs floats.
pub const FLOAT_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Value {
    coef: BigRational,
    powers: Vec<(BigRational, BigRational)>,
    lin: BigRational,
    fl: f64,
}

impl Value {
    pub fn exact(q: BigRational) -> Self {
        Value { coef: q, powers: Vec::new(), lin: BigRational::zero(), fl: 0.0 }
    }

    pub fn one() -> Self {
        Self::exact(BigRational::one())
    }

    pub fn zero() -> Self {
        Self::exact(BigRational::zero())
    }

    /// `base^exp` for `base >= 0`.
    pub fn power(base: BigRational, exp: BigRational) -> Self {
        assert!(!base.is_negative(), "negative base");
        if base.is_zero() {
            return if exp.is_positive() { Self::zero() } else { Self::one() };
        }
        Value { coef: BigRational::one(), powers: vec![(base, exp)], lin: BigRational::zero(), fl: 0.0 }
            .normalized()
    }

    /// `e^lin`
    pub fn exp(lin: BigRational) -> Self {
        Value { coef: BigRational::one(), powers: Vec::new(), lin, fl: 0.0 }
    }

    /// `e^l` for a float exponent.
    pub fn exp_float(l: f64) -> Self {
        Value { coef: BigRational::one(), powers: Vec::new(), lin: BigRational::zero(), fl: l }
    }

    fn normalized(mut self) -> Self {
        let mut merged: Vec<(BigRational, BigRational)> = Vec::new();
        for (b, e) in self.powers.drain(..) {
            if e.is_zero() || b.is_one() {
                continue;
            }
            match merged.iter_mut().find(|(_, e2)| *e2 == e) {
                Some(slot) => slot.0 = &slot.0 * &b,
                None => merged.push((b, e)),
            }
        }
        let mut kept = Vec::new();
        for (b, e) in merged {
            if b.is_one() {
                continue;
            }
            // fold perfect powers into the coefficient
            let d = e.denom().to_u32();
            let n = e.numer().to_i64();
            match (d, n) {
                (Some(d), Some(n)) if d <= 64 && n.abs() <= 4096 => match rational::exact_root(&b, d) {
                    Some(r) => self.coef *= rational::powi(&r, n),
                    None => kept.push((b, e)),
                },
                _ => kept.push((b, e)),
            }
        }
        kept.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        self.powers = kept;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    /// No float part: the value is determined by rationals alone.
    pub fn is_symbolic(&self) -> bool {
        self.fl == 0.0
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coef.is_zero() {
            return Some(BigRational::zero());
        }
        (self.powers.is_empty() && self.lin.is_zero() && self.fl == 0.0).then(|| self.coef.clone())
    }

    /// Exact natural log when it is rational (`e^q`, or the value 1).
    pub fn exact_ln(&self) -> Option<BigRational> {
        (self.coef.is_one() && self.powers.is_empty() && self.fl == 0.0).then(|| self.lin.clone())
    }

    pub fn ln(&self) -> f64 {
        if self.coef.is_zero() {
            return f64::NEG_INFINITY;
        }
        let mut l = rational::ln_abs(&self.coef) + rational::to_f64(&self.lin) + self.fl;
        for (b, e) in &self.powers {
            l += rational::to_f64(e) * rational::ln_abs(b);
        }
        l
    }

    pub fn to_f64(&self) -> f64 {
        match self.as_rational() {
            Some(q) => rational::to_f64(&q),
            None => self.ln().exp(),
        }
    }

    pub fn mul(&self, o: &Value) -> Value {
        if self.is_zero() || o.is_zero() {
            return Value::zero();
        }
        let mut powers = self.powers.clone();
        powers.extend(o.powers.iter().cloned());
        Value { coef: &self.coef * &o.coef, powers, lin: &self.lin + &o.lin, fl: self.fl + o.fl }.normalized()
    }

    pub fn scale(&self, c: &BigRational) -> Value {
        self.mul(&Value::exact(c.clone()))
    }

    pub fn recip(&self) -> Result<Value> {
        if self.is_zero() {
            return Err(Error::NotCertifiable("reciprocal of zero".into()));
        }
        Ok(Value {
            coef: self.coef.recip(),
            powers: self.powers.iter().map(|(b, e)| (b.recip(), e.clone())).collect(),
            lin: -&self.lin,
            fl: -self.fl,
        }
        .normalized())
    }

    pub fn div(&self, o: &Value) -> Result<Value> {
        Ok(self.mul(&o.recip()?))
    }

    /// `self^r` for rational `r`.
    pub fn pow(&self, r: &BigRational) -> Result<Value> {
        if self.is_zero() {
            return match r.cmp(&BigRational::zero()) {
                Ordering::Greater => Ok(Value::zero()),
                Ordering::Equal => Ok(Value::one()),
                Ordering::Less => Err(Error::NotCertifiable("zero raised to a negative power".into())),
            };
        }
        if self.coef.is_negative() {
            return Err(Error::NotCertifiable("negative value raised to a rational power".into()));
        }
        let mut powers: Vec<_> = self.powers.iter().map(|(b, e)| (b.clone(), e * r)).collect();
        powers.push((self.coef.clone(), r.clone()));
        Ok(Value { coef: BigRational::one(), powers, lin: &self.lin * r, fl: self.fl * rational::to_f64(r) }
            .normalized())
    }

    /// `max(0, ln self)`, exact when the log is.
    pub fn log_plus(&self) -> LogValue {
        match self.exact_ln() {
            Some(l) => LogValue::Exact(l.max(BigRational::zero())),
            None => {
                if let Some(q) = self.as_rational() {
                    if q <= BigRational::one() {
                        return LogValue::Exact(BigRational::zero());
                    }
                }
                LogValue::Float(self.ln().max(0.0))
            }
        }
    }

    /// Exact sign of `self - 1` when it is decidable without floats.
    fn cmp_one_exact(&self) -> Option<Ordering> {
        if self.fl != 0.0 {
            return None;
        }
        if self.is_zero() {
            return Some(Ordering::Less);
        }
        if !self.lin.is_zero() {
            if !self.powers.is_empty() {
                return None;
            }
            // coef * e^lin vs 1, with e^lin enclosed by rationals
            if self.lin.abs() > rational::int(64) {
                return None;
            }
            let (lo, hi) = rational::exp_bounds(&self.lin);
            let one = BigRational::one();
            if &self.coef * &lo > one {
                return Some(Ordering::Greater);
            }
            if &self.coef * &hi < one {
                return Some(Ordering::Less);
            }
            return None;
        }
        // coef * prod b^e vs 1: raise to the common denominator D
        let mut d = BigInt::one();
        for (_, e) in &self.powers {
            d = d.lcm(e.denom());
        }
        let d = d.to_i64().filter(|d| *d <= 256)?;
        let mut num = rational::powi(&self.coef, d);
        for (b, e) in &self.powers {
            let k = (e * rational::int(d)).to_integer().to_i64().filter(|k| k.abs() <= 4096)?;
            num *= rational::powi(b, k);
        }
        Some(num.cmp(&BigRational::one()))
    }

    /// Certified comparison. `None` when the values agree to within the
    /// float margin and no exact argument settles the order.
    pub fn compare(&self, o: &Value) -> Option<Ordering> {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => return Some(Ordering::Equal),
            (true, false) => return Some(Ordering::Less),
            (false, true) => return Some(Ordering::Greater),
            _ => {}
        }
        let r = self.div(o).expect("nonzero");
        if let Some(ord) = r.cmp_one_exact() {
            return Some(ord);
        }
        let l = r.ln();
        let tol = FLOAT_MARGIN * 1f64.max(self.ln().abs()).max(o.ln().abs());
        if l > tol {
            Some(Ordering::Greater)
        } else if l < -tol {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Human-readable closed form, e.g. `3/2`, `(1/8)^(-1/2)`, `1/1*exp(5/1)`.
    pub fn describe(&self) -> String {
        if let Some(q) = self.as_rational() {
            return fmt_rational(&q);
        }
        let mut parts = vec![fmt_rational(&self.coef)];
        for (b, e) in &self.powers {
            parts.push(format!("({})^({})", fmt_rational(b), fmt_rational(e)));
        }
        if !self.lin.is_zero() {
            parts.push(format!("exp({})", fmt_rational(&self.lin)));
        }
        if self.fl != 0.0 {
            parts.push(format!("exp({:e})", self.fl));
        }
        parts.join("*")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// A logarithm, exact when possible.
#[derive(Clone, Debug, PartialEq)]
pub enum LogValue {
    Exact(BigRational),
    Float(f64),
}

impl LogValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            LogValue::Exact(q) => rational::to_f64(q),
            LogValue::Float(x) => *x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn perfect_powers_fold() {
        assert_eq!(Value::exact(rat(1, 4)).pow(&rat(-1, 2)).unwrap().as_rational(), Some(int(2)));
        assert_eq!(Value::exact(rat(1, 8)).pow(&rat(-2, 3)).unwrap().as_rational(), Some(int(4)));
        let w = Value::power(rat(1, 10), rat(1, 4));
        assert!(w.as_rational().is_none());
        assert_eq!(w.pow(&int(4)).unwrap().as_rational(), Some(rat(1, 10)));
    }

    #[test]
    fn ratios_cancel() {
        let w = Value::power(rat(1, 5), rat(1, 4)).mul(&Value::exp(rat(3, 2)));
        let c = w.scale(&rat(7, 3));
        assert_eq!(c.div(&w).unwrap().as_rational(), Some(rat(7, 3)));
    }

    #[test]
    fn exact_comparisons() {
        // (1/5)^{1/4} vs (1/10)^{1/2}: 1/5 > 1/100
        let a = Value::power(rat(1, 5), rat(1, 4));
        let b = Value::power(rat(1, 10), rat(1, 2));
        assert_eq!(a.compare(&b), Some(Ordering::Greater));
        assert_eq!(Value::exp(int(1)).compare(&Value::exact(rat(271, 100))), Some(Ordering::Greater));
        assert_eq!(Value::exp(int(1)).compare(&Value::exact(rat(272, 100))), Some(Ordering::Less));
        let f = Value::exp_float(1e-20);
        assert_eq!(f.compare(&Value::one()), None);
        assert_eq!(Value::zero().compare(&Value::one()), Some(Ordering::Less));
    }

    #[test]
    fn logs() {
        assert_eq!(Value::exp(int(3)).log_plus(), LogValue::Exact(int(3)));
        assert_eq!(Value::exact(rat(1, 2)).log_plus(), LogValue::Exact(int(0)));
        let v = Value::exact(int(2)).log_plus().to_f64();
        assert!((v - 2f64.ln()).abs() < 1e-15);
    }
}
