//! The lacunary sequence `q_1 = 2`, `q_n > 2 q_{n-1} exp(q_{n-1}^2)` with
//! `q_{n-1} | q_n`, and `alpha = sum 1/q_n`.
//!
//! Only `q_1, q_2` fit in memory; `q_3` is kept as the lower bound
//! `q_3 > 440 * 2^69821`, which is all the checks need.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::rational::{self, fmt_rational, int};
use crate::weights::{Builtin, WeightFn};

use super::{Certificate, Property, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QTerm {
    Exact {
        #[serde(with = "rational::bigstr")]
        value: BigUint,
    },
    /// `q > factor * 2^log2`
    LowerBound {
        #[serde(with = "rational::bigstr")]
        factor: BigUint,
        log2: u64,
    },
}

impl QTerm {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            QTerm::Exact { value } => Some(value),
            QTerm::LowerBound { .. } => None,
        }
    }

    /// A rational not above the term.
    fn lower(&self) -> BigRational {
        match self {
            QTerm::Exact { value } => rational::from_big(value),
            QTerm::LowerBound { factor, log2 } => {
                BigRational::from_integer(BigInt::from(factor.clone()) << (*log2 as usize))
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            QTerm::Exact { value } => value.to_string(),
            QTerm::LowerBound { factor, log2 } => format!("> {factor}*2^{log2}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSequence {
    pub depth: u32,
    /// `q_1 .. q_depth`
    pub terms: Vec<QTerm>,
    /// lower bound for `q_{depth+1}` when one is representable
    pub next: Option<QTerm>,
}

impl QSequence {
    fn exact_terms(&self) -> Vec<BigUint> {
        self.terms.iter().map_while(|t| t.exact().cloned()).collect()
    }

    /// Lower bound of the first term that is not stored exactly.
    fn first_bound(&self) -> Option<&QTerm> {
        self.terms.iter().find(|t| t.exact().is_none()).or(self.next.as_ref())
    }

    pub fn q(&self, n: u32) -> Option<&QTerm> {
        self.terms.get(n.checked_sub(1)? as usize)
    }
}

/// `m` with `q_prev * m` the least multiple of `q_prev` above
/// `2 q_prev e^{q_prev^2}`, when `q_prev^2 <= 64`.
fn next_multiplier(q_prev: &BigUint) -> Result<BigUint> {
    let sq = rational::from_big(&(q_prev * q_prev));
    let (lo, hi) = rational::exp_bounds(&sq);
    let (flo, fhi) = ((int(2) * lo).floor(), (int(2) * hi).floor());
    if flo != fhi {
        return Err(Error::NotCertifiable("exp enclosure straddles an integer".into()));
    }
    let m = flo.to_integer() + BigInt::one();
    Ok(m.to_biguint().expect("positive"))
}

/// `log2` lower bound for `e^{q^2}`: `floor(q^2 * 1.4426)` (`1/ln 2 > 1.4426`).
fn exp_sq_log2_lower(q: &BigUint) -> Result<u64> {
    let sq = q * q;
    let v = BigRational::from_integer(BigInt::from(sq)) * rational::rat(14426, 10000);
    let f = v.floor().to_integer();
    u64::try_from(f).map_err(|_| Error::Truncation("exponent of the next term is not representable".into()))
}

/// `q_1..q_depth` for depth 2 or 3.
pub fn build_q_sequence(depth: u32) -> Result<QSequence> {
    if depth < 2 {
        return Err(Error::InvalidParameter("depth must be at least 2".into()));
    }
    if depth > 3 {
        return Err(Error::Truncation(format!("depth {depth} refused: q_4 has no representable bound")));
    }
    let q1 = BigUint::from(2u32);
    let q2 = &q1 * next_multiplier(&q1)?;
    // q_3 = q_2 m with m > 2 e^{q_2^2}: q_3 > 2 q_2 * 2^{log2}
    let q3 = QTerm::LowerBound { factor: BigUint::from(2u32) * &q2, log2: exp_sq_log2_lower(&q2)? };
    let mut terms = vec![QTerm::Exact { value: q1 }, QTerm::Exact { value: q2 }];
    let next = if depth == 2 {
        Some(q3)
    } else {
        terms.push(q3);
        None
    };
    Ok(QSequence { depth, terms, next })
}

/// Enclosure of `{q_n alpha}` as `(lo, hi)` with `lo < {q_n alpha} < hi`.
fn fractional_enclosure(seq: &QSequence, n: u32) -> Result<(BigRational, BigRational)> {
    let exact = seq.exact_terms();
    if n == 0 || n as usize > exact.len() {
        return Err(Error::Truncation(format!("q_{n} is not known exactly at depth {}", seq.depth)));
    }
    let bound = seq
        .first_bound()
        .ok_or_else(|| Error::Truncation("no bound for the tail of alpha".into()))?
        .lower();
    let qn = rational::from_big(&exact[n as usize - 1]);
    // q_n sum_{k<=n} 1/q_k is an integer by divisibility
    let mut head = BigRational::zero();
    for q in &exact[n as usize..] {
        head += &qn / rational::from_big(q);
    }
    let lo = rational::frac(&head);
    // 0 < sum_{k>K} 1/q_k < 2/q_{K+1}, since q_{k+1} > 2 q_k
    let hi = &lo + int(2) * &qn / bound;
    if hi >= BigRational::one() {
        return Err(Error::NotCertifiable("fractional part enclosure wraps around 1".into()));
    }
    Ok((lo, hi))
}

/// `{q_n alpha} < 2 q_n / q_{n+1}` and `{q_n alpha} < e^{-q_n^2}`.
pub fn check_q_fractional_bound(seq: &QSequence, n: u32) -> Result<Certificate> {
    let (lo, hi) = fractional_enclosure(seq, n)?;
    let exact = seq.exact_terms();
    let qn = &exact[n as usize - 1];
    let qnr = rational::from_big(qn);
    let mut cert = Certificate::new(Property::Countex, "q-sequence");
    cert.put("n", n);
    cert.put("q_n", qn.to_string());
    cert.put("frac_lower", fmt_rational(&lo));
    cert.put("frac_upper", format!("{} + {}/q_{}", fmt_rational(&lo), int(2) * &qnr, exact.len() + 1));
    cert.put("frac_upper_approx", rational::to_f64(&hi));
    let mut verdicts = Vec::new();

    // first bound
    let next = exact.get(n as usize);
    match next {
        Some(q) => {
            let target = int(2) * &qnr / rational::from_big(q);
            cert.put("two_q_n_over_q_next", fmt_rational(&target));
            if hi > target {
                verdicts.push(Verdict::Inconclusive { reason: "enclosure exceeds 2 q_n / q_{n+1}".into() });
            }
        }
        None => {
            // {q_n alpha} = q_n sum_{k>n} 1/q_k < 2 q_n / q_{n+1} by the growth of q
            let b = seq.first_bound().expect("checked above");
            cert.put("q_next", b.describe());
            cert.notes.push(format!("q_{} is symbolic; bound by 2 q_k < q_(k+1)", n + 1));
        }
    }

    // second bound
    let sq = &qnr * &qnr;
    if sq <= int(64) {
        let (elo, _) = rational::exp_bounds(&-sq);
        cert.put("exp_minus_q_n_sq_lower", fmt_rational(&rational::round_down(&elo, 64)));
        if hi >= elo {
            verdicts.push(Verdict::Fails {
                witness: json!({ "n": n, "frac_upper": rational::to_f64(&hi), "exp_bound": rational::to_f64(&elo) }),
            });
        }
    } else {
        // 2 q_n / q_{n+1} < e^{-q_n^2} is the defining inequality of q_{n+1}
        cert.notes.push("second bound follows from q_(n+1) > 2 q_n exp(q_n^2)".into());
    }
    cert.verdict = super::combine(verdicts);
    Ok(cert.seal(&serde_json::to_string(seq).expect("sequence serializes")))
}

/// Per-term bounds `|log w(q_n alpha)| / q_n^2 >= 1/4` for `w(t) = t^{1/4}`.
pub fn countex_divergence_lower_bound(seq: &QSequence, w: &WeightFn) -> Result<Certificate> {
    if w.builtin() != Some(Builtin::CircleQuarter) || !w.scale().is_one() {
        return Err(Error::InvalidParameter("expects the circle weight t^(1/4)".into()));
    }
    let mut cert = Certificate::new(Property::Countex, w.construction().tag());
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut total = BigRational::zero();
    for n in 1..=seq.exact_terms().len() as u32 {
        let c = check_q_fractional_bound(seq, n)?;
        let q = seq.q(n).expect("in range").describe();
        if c.verdict.is_holds() {
            // {q_n a} < e^{-q_n^2}  =>  |log {q_n a}^{1/4}| / q_n^2 > 1/4
            let (_, hi) = fractional_enclosure(seq, n)?;
            let approx = -rational::ln_abs(&hi) / 4.0 / rational::to_f64(&rational::from_big(seq.q(n).unwrap().exact().unwrap())).powi(2);
            rows.push(json!({ "n": n, "q_n": q, "lower_bound": "1/4", "term_lower_approx": approx }));
            total += rational::rat(1, 4);
        } else {
            verdicts.push(Verdict::Inconclusive { reason: format!("fractional bound at n = {n} not established") });
        }
    }
    cert.put("terms", rows);
    cert.put("partial_sum_lower", fmt_rational(&total));
    cert.verdict = super::combine(verdicts);
    Ok(cert.seal(&serde_json::to_string(seq).expect("sequence serializes")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_two() {
        let s = build_q_sequence(2).unwrap();
        assert_eq!(s.exact_terms(), vec![BigUint::from(2u32), BigUint::from(220u32)]);
        let (lo, hi) = fractional_enclosure(&s, 1).unwrap();
        assert_eq!(lo, rational::rat(1, 110));
        assert!(hi < rational::rat(1, 55));
        assert!(check_q_fractional_bound(&s, 1).unwrap().verdict.is_holds());
        assert!(check_q_fractional_bound(&s, 2).unwrap().verdict.is_holds());
        assert!(check_q_fractional_bound(&s, 3).is_err());
        assert!(build_q_sequence(4).is_err());
    }

    #[test]
    fn q3_exponent() {
        // 48400 / ln 2 = 69826.9..., so 69821 is a safe lower bound
        assert_eq!(exp_sq_log2_lower(&BigUint::from(220u32)).unwrap(), 69821);
    }
}
