//! The series `sum_n log+ w(nx) / n^2`: partial sums and a classifier that
//! only answers from growth bounds it can prove.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::group::GroupPoint;
use crate::rational::{self, fmt_rational, int, ratstr};
use crate::value::{LogValue, Value};
use crate::weights::{Builtin, Construction, WeightFn};

use super::checks::poly_decay_constants;
use super::{Certificate, Property, Verdict};

/// One partial sum `S_N`, exact when every term is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub n: u32,
    #[serde(with = "rational::optstr", default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<BigRational>,
    pub approx: f64,
}

/// `S_1, ..., S_N`.
pub fn domar_partial(w: &WeightFn, x: &GroupPoint, n_max: u32) -> Result<Vec<PartialSum>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let mut exact = Some(BigRational::zero());
    let mut approx = 0.0f64;
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let nn = int(n as i64 * n as i64);
        match w.eval(&x.nmul(n as i64))?.log_plus() {
            LogValue::Exact(l) => {
                let t = l / nn;
                approx += rational::to_f64(&t);
                if let Some(e) = exact.as_mut() {
                    *e += t;
                }
            }
            LogValue::Float(l) => {
                approx += l / (n as f64 * n as f64);
                exact = None;
            }
        }
        out.push(PartialSum {
            n,
            approx: exact.as_ref().map_or(approx, rational::to_f64),
            exact: exact.clone(),
        });
    }
    Ok(out)
}

/// Growth along the orbit `n -> nx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Growth {
    /// `log+ w(nx) <= a + d log n` for all `n >= 1`
    Polynomial {
        #[serde(with = "ratstr")]
        a: BigRational,
        #[serde(with = "ratstr")]
        d: BigRational,
    },
    /// `log+ w(nx) >= c n` for all `n >= 1`
    Linear {
        #[serde(with = "ratstr")]
        c: BigRational,
    },
    /// `log+ w(nx) >= c n / log(e + c n)` for all `n >= 1`
    LinearOverLog {
        #[serde(with = "ratstr")]
        c: BigRational,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomarVerdict {
    pub classification: Classification,
    pub growth: Option<Growth>,
    /// upper bound for every partial sum (convergent case)
    pub cap: Option<f64>,
    pub certificate: Certificate,
}

/// Rational `a >= ln y` for `y >= 1`.
fn ln_upper(y: &BigRational) -> BigRational {
    if y <= &BigRational::one() {
        return BigRational::zero();
    }
    let f = rational::ln_abs(y);
    if f < 60.0 {
        let mut margin = 1e-12;
        loop {
            let cand = rational::round_up(&rational::from_f64(f + margin * f.max(1.0)).expect("finite"), 64);
            if &rational::exp_bounds(&cand).0 >= y {
                return cand;
            }
            margin *= 16.0;
        }
    }
    // y < 2^bits, ln 2 < 6932/10000
    let bits = y.ceil().to_integer().bits();
    int(bits as i64) * rational::rat(6932, 10000)
}

/// Rational `a >= ln v`; float parts get a relative margin of `1e-9`.
fn ln_upper_value(v: &Value) -> BigRational {
    match v.as_rational() {
        Some(q) => ln_upper(&q),
        None => {
            let l = v.ln();
            let l = l + 1e-9 * l.abs().max(1.0);
            rational::round_up(&rational::from_f64(l.max(0.0)).expect("finite"), 64)
        }
    }
}

fn real_coord(x: &GroupPoint) -> Result<BigRational> {
    match x {
        GroupPoint::Real(r) if r.0.len() == 1 => rational::from_f64(r.0[0]),
        GroupPoint::Circle(c) => Ok(c.t().clone()),
        _ => Err(Error::DescriptorMismatch(x.to_string())),
    }
}

/// Provable growth of `log+ w(nx)`, or `None`.
pub fn growth_bound(w: &WeightFn, x: &GroupPoint) -> Result<Option<Growth>> {
    let s = w.scale();
    let ls = ln_upper(s);
    let poly = |a: BigRational, d: BigRational| Some(Growth::Polynomial { a: a + &ls, d });
    let zero = BigRational::zero;
    let out = match w.construction() {
        Construction::Builtin { name } => {
            // the linear lower bounds need scale >= 1 to survive log+
            let t = real_coord(x)?;
            let at = t.abs();
            let one = BigRational::one();
            match name {
                Builtin::One | Builtin::CircleQuarter => poly(zero(), zero()),
                // 1 + n^2 t^2 <= n^2 (1 + t^2)
                Builtin::Poly2 => poly(ln_upper(&(&one + &t * &t)), int(2)),
                Builtin::Poly2Char if !t.is_positive() => poly(ln_upper(&(&one + &t * &t)), int(2)),
                _ if at.is_zero() => poly(ln_upper(&(&one + &t * &t)), zero()),
                _ if s < &one => None,
                Builtin::ExpAbs | Builtin::Poly2Exp => Some(Growth::Linear { c: at }),
                Builtin::Poly2Char => Some(Growth::Linear { c: t }),
                // |t| / log(e + |t|) with the polynomial factor dropped
                Builtin::Poly2ExpLog => Some(Growth::LinearOverLog { c: at }),
            }
        }
        Construction::Algebra { base, p, inverse: false, .. } => {
            // w = u^{-e}: 1/u(nx) <= C n^d gives log w(nx) <= e ln C + e d ln n
            let e = (p - BigRational::one()) / p;
            match poly_decay_constants(base, x)? {
                Some(pd) => {
                    let a = &e * ln_upper_value(&pd.c);
                    poly(a, &e * int(pd.d as i64))
                }
                None => None,
            }
        }
        // bounded weights: log+ w <= log+ sup w
        _ => w.sup_bound().map(|b| Growth::Polynomial { a: ln_upper_value(&b), d: zero() }),
    };
    Ok(out)
}

/// Upper bound for `sum_{n>=1} ln n / n^2`.
fn log_series_upper() -> f64 {
    const N: u32 = 4000;
    let mut s = 0.0f64;
    for n in (2..=N).rev() {
        let f = n as f64;
        s += f.ln() / (f * f);
    }
    // ln x / x^2 decreases for x >= 2, so the tail is below its integral
    let f = N as f64;
    let tail = (f.ln() + 1.0) / f;
    (s * (1.0 + 1e-12) + tail).next_up()
}

/// `a pi^2/6 + d sum ln n/n^2`, rounded up.
fn cap_for(a: &BigRational, d: &BigRational) -> f64 {
    let zeta2 = 1.644_934_066_848_226_5f64.next_up();
    let v = rational::to_f64(a) * zeta2 + rational::to_f64(d) * log_series_upper();
    (v * (1.0 + 1e-12)).next_up()
}

pub fn domar_classify(w: &WeightFn, x: &GroupPoint) -> Result<DomarVerdict> {
    let growth = growth_bound(w, x)?;
    let mut cert = Certificate::new(Property::Domar, w.construction().tag());
    cert.put("x", x);
    let (classification, cap) = match &growth {
        Some(Growth::Polynomial { a, d }) => {
            let cap = cap_for(a, d);
            cert.put("cap", cap);
            cert.verdict = Verdict::Holds;
            (Classification::Convergent, Some(cap))
        }
        Some(g @ (Growth::Linear { c } | Growth::LinearOverLog { c })) => {
            let series = match g {
                Growth::Linear { .. } => "sum c/n",
                _ => "sum c/(n log(e + c n))",
            };
            cert.verdict = Verdict::Fails {
                witness: json!({ "c": fmt_rational(c), "growth": g, "divergent_minorant": series }),
            };
            (Classification::Divergent, None)
        }
        None => {
            cert.verdict = Verdict::Inconclusive { reason: "no provable growth bound for this weight".into() };
            (Classification::Inconclusive, None)
        }
    };
    cert.put("classification", classification);
    if let Some(g) = &growth {
        cert.put("growth", g);
    }
    let salt = serde_json::to_string(w).expect("weights serialize");
    Ok(DomarVerdict { classification, growth, cap, certificate: cert.seal(&salt) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::builtin_weight;

    fn one_point() -> GroupPoint {
        GroupPoint::real(vec![1.0]).unwrap()
    }

    #[test]
    fn harmonic_partial_sum() {
        let w = builtin_weight(Builtin::ExpAbs);
        let s = domar_partial(&w, &one_point(), 3).unwrap();
        assert_eq!(s[2].exact, Some(rational::rat(11, 6)));
    }

    #[test]
    fn three_verdicts() {
        let x = one_point();
        let c = |b| domar_classify(&builtin_weight(b), &x).unwrap().classification;
        assert_eq!(c(Builtin::Poly2), Classification::Convergent);
        assert_eq!(c(Builtin::Poly2Exp), Classification::Divergent);
        assert_eq!(c(Builtin::Poly2ExpLog), Classification::Divergent);
    }

    #[test]
    fn ln_upper_is_above() {
        for y in [rational::rat(2, 1), rational::rat(17, 3), rational::int(1 << 40)] {
            let a = ln_upper(&y);
            assert!(rational::to_f64(&a) >= rational::ln_abs(&y));
            assert!(rational::to_f64(&a) - rational::ln_abs(&y) < 1e-6 * rational::ln_abs(&y).max(1.0));
        }
    }
}
