//! Exact rational helpers shared by every module.
//!
//! Rationals travel through JSON as `"num/den"` strings (always with an
//! explicit denominator), which keeps certificate payloads bit-exact.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn from_big(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// Renders as `num/den`, even for integers.
pub fn fmt_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `a/b`, plain integers and finite decimals (`-1.25`).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip_abs.is_empty() {
            BigInt::zero()
        } else {
            ip_abs.parse().map_err(|_| bad())?
        };
        let frac: BigInt = fp.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), fp.len());
        let v = BigRational::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let l = ln_abs(x);
    let v = l.exp();
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite float {x}")))
}

fn ln_bigint(n: &BigInt) -> f64 {
    let mag = n.magnitude();
    let bits = mag.bits();
    if bits <= 900 {
        return mag.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (mag >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of `|x|`, safe for magnitudes far outside the f64 range.
pub fn ln_abs(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

pub fn floor_abs(x: &BigRational) -> BigUint {
    x.abs().floor().to_integer().to_biguint().unwrap_or_default()
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Exact `x^e` for integer `e` (negative allowed when `x != 0`).
pub fn powi(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), e.unsigned_abs() as usize)
    }
}

/// Exact `k`-th root of a nonnegative rational when it exists.
pub fn exact_root(x: &BigRational, k: u32) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().to_biguint()?;
    let d = x.denom().to_biguint()?;
    let rn = n.nth_root(k);
    let rd = d.nth_root(k);
    if num_traits::pow(rn.clone(), k as usize) == n && num_traits::pow(rd.clone(), k as usize) == d {
        Some(BigRational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// Rational enclosure `[lo, hi]` of `e^x` for `|x| <= 64`, from the Taylor
/// series with a geometric remainder bound.
pub fn exp_bounds(x: &BigRational) -> (BigRational, BigRational) {
    if x.is_negative() {
        let (lo, hi) = exp_bounds(&-x);
        return (hi.recip(), lo.recip());
    }
    // e^x = (e^{x/2^s})^{2^s} keeps the series argument below 1/2.
    let mut s = 0u32;
    let mut y = x.clone();
    let half = rat(1, 2);
    while y > half {
        y /= int(2);
        s += 1;
    }
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut k = 1i64;
    loop {
        term = term * &y / int(k);
        sum += &term;
        k += 1;
        if term < rat(1, 1 << 40) * rat(1, 1 << 40) {
            break;
        }
    }
    // remainder after term k-1: <= term * y/k / (1 - y/k) <= 2 * term * y
    let rem = &term * &y * int(2);
    let mut lo = sum.clone();
    let mut hi = sum + rem;
    for _ in 0..s {
        lo = &lo * &lo;
        hi = &hi * &hi;
        // keep denominators bounded; round outward to 2^-200
        lo = round_down(&lo, 200);
        hi = round_up(&hi, 200);
    }
    (lo, hi)
}

/// Largest multiple of `2^-bits` not above `x`.
pub fn round_down(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = (x * BigRational::from_integer(scale.clone())).floor().to_integer();
    BigRational::new(scaled, scale)
}

/// Smallest multiple of `2^-bits` not below `x`.
pub fn round_up(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = (x * BigRational::from_integer(scale.clone())).ceil().to_integer();
    BigRational::new(scaled, scale)
}

/// Rational lower bound of `ln 2` (`e^{0.6931} < 2` is checked, not assumed).
pub fn ln2_lower() -> BigRational {
    let cand = rat(6931, 10000);
    let (_, hi) = exp_bounds(&cand);
    assert!(hi < int(2), "ln 2 lower bound failed to certify");
    cand
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

pub fn sign_of(x: &BigRational) -> Sign {
    x.numer().sign()
}

/// Serde adapter: a `BigRational` as a `"num/den"` string.
pub mod ratstr {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Option<BigRational>`.
pub mod optstr {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&fmt_rational(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigRational>, D::Error> {
        match Option::<String>::deserialize(d)? {
            Some(s) => parse_rational(&s).map(Some).map_err(serde::de::Error::custom),
            None => Ok(None),
        }
    }
}

/// Serde adapter for `Vec<BigRational>`.
pub mod ratvec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_rational(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for `BigUint` as a decimal string.
pub mod bigstr {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("5/2").unwrap(), rat(5, 2));
        assert_eq!(parse_rational("-10/4").unwrap(), rat(-5, 2));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(fmt_rational(&int(0)), "0/1");
    }

    #[test]
    fn exp_enclosure() {
        for x in [rat(0, 1), rat(1, 3), int(1), int(4), rat(-4, 1), int(20)] {
            let (lo, hi) = exp_bounds(&x);
            let v = to_f64(&x).exp();
            assert!(to_f64(&lo) <= v * (1.0 + 1e-14) && to_f64(&hi) >= v * (1.0 - 1e-14));
            assert!(lo <= hi);
            assert!(to_f64(&(&hi - &lo)) <= v * 1e-20);
        }
    }

    #[test]
    fn roots() {
        assert_eq!(exact_root(&rat(1, 8), 3), Some(rat(1, 2)));
        assert_eq!(exact_root(&rat(2, 1), 2), None);
    }

    #[test]
    fn ln_of_huge() {
        let big = BigRational::from_integer(BigInt::one() << 5000u32);
        assert!((ln_abs(&big) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!(ln2_lower() < int(1));
    }
}
