//! Closed-form positive sequences `j -> a_j` (`j >= 1`) with certified sums.
//!
//! A sequence is an explicit head followed by `coef * base^j * (j!)^fact`.
//! Products of such sequences stay in the family, which covers every mass
//! and tail sum the weight constructions need (`phi_n |G_n|`,
//! `phi_j^2 |U_j|`, `phi_j t_j`, ...).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, rat, ratstr, ratvec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedSeq {
    head: Vec<BigRational>,
    coef: BigRational,
    base: BigRational,
    fact: i32,
}

/// Upper bound on a series; `exact` when the bound is the value itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesBound {
    pub value: BigRational,
    pub exact: bool,
}

fn fact_pow(j: u32, e: i32) -> BigRational {
    let f = rational::from_big(&rational::factorial(j));
    rational::powi(&f, e as i64)
}

impl ClosedSeq {
    pub fn new(head: Vec<BigRational>, coef: BigRational, base: BigRational, fact: i32) -> Self {
        ClosedSeq { head, coef, base, fact }
    }

    /// `coef * base^j`
    pub fn geometric(coef: BigRational, base: BigRational) -> Self {
        Self::new(Vec::new(), coef, base, 0)
    }

    pub fn term(&self, j: u32) -> BigRational {
        assert!(j >= 1, "sequences are indexed from 1");
        if let Some(h) = self.head.get(j as usize - 1) {
            return h.clone();
        }
        &self.coef * rational::powi(&self.base, j as i64) * fact_pow(j, self.fact)
    }

    pub fn head_len(&self) -> u32 {
        self.head.len() as u32
    }

    pub fn mul(&self, other: &ClosedSeq) -> ClosedSeq {
        let len = self.head.len().max(other.head.len()) as u32;
        let head = (1..=len).map(|j| self.term(j) * other.term(j)).collect();
        ClosedSeq {
            head,
            coef: &self.coef * &other.coef,
            base: &self.base * &other.base,
            fact: self.fact + other.fact,
        }
    }

    pub fn square(&self) -> ClosedSeq {
        self.mul(self)
    }

    pub fn scale(&self, c: &BigRational) -> ClosedSeq {
        ClosedSeq {
            head: self.head.iter().map(|h| h * c).collect(),
            coef: &self.coef * c,
            base: self.base.clone(),
            fact: self.fact,
        }
    }

    /// `sum_{j=1}^{n} a_j`
    pub fn partial_sum(&self, n: u32) -> BigRational {
        (1..=n).map(|j| self.term(j)).sum()
    }

    /// Certified bound on `sum_{j > after} a_j`.
    pub fn tail_sum(&self, after: u32) -> Result<SeriesBound> {
        let len = self.head_len();
        let mut acc = BigRational::zero();
        for j in (after + 1)..=len {
            acc += self.term(j);
        }
        let start = after.max(len) + 1;
        if self.coef.is_zero() || self.base.is_zero() {
            return Ok(SeriesBound { value: acc, exact: true });
        }
        if self.base.is_negative() || self.coef.is_negative() {
            return Err(Error::NotCertifiable("negative terms in a positive series".into()));
        }
        match self.fact.signum() {
            0 => {
                if self.base >= BigRational::one() {
                    return Err(Error::NotCertifiable(format!(
                        "geometric ratio {} is not below 1",
                        rational::fmt_rational(&self.base)
                    )));
                }
                let first = self.term(start);
                acc += first / (BigRational::one() - &self.base);
                Ok(SeriesBound { value: acc, exact: true })
            }
            1 => Err(Error::NotCertifiable("terms grow factorially".into())),
            _ => {
                // a_{j+1}/a_j = base / (j+1)^k decreases in j: sum explicitly until
                // the ratio drops to 1/2 and the terms are negligible, then close
                // with a geometric majorant.
                let k = (-self.fact) as i64;
                let ratio_after = |j: u32| &self.base / rational::powi(&int(j as i64 + 1), k);
                let negligible = self.term(start) * rat(1, 1 << 32) * rat(1, 1 << 32);
                let mut j = start;
                let mut steps = 0u32;
                while ratio_after(j) > rat(1, 2) || self.term(j) > negligible {
                    acc += self.term(j);
                    j += 1;
                    steps += 1;
                    if steps > 100_000 {
                        return Err(Error::NotCertifiable("ratio test did not settle".into()));
                    }
                }
                let r = ratio_after(j);
                acc += self.term(j) / (BigRational::one() - r);
                Ok(SeriesBound { value: acc, exact: false })
            }
        }
    }

    pub fn sum(&self) -> Result<SeriesBound> {
        self.tail_sum(0)
    }
}

/// The decreasing sequence `phi_n > 0` that fixes a layered weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiSequence {
    /// `phi_n = ratio^n`
    Geometric {
        #[serde(with = "ratstr")]
        ratio: BigRational,
    },
    /// `phi_n = 1 / (n! base^n)`
    FactorialGeometric {
        #[serde(with = "ratstr")]
        base: BigRational,
    },
    /// `phi_n = head[n-1]` for `n <= L`, then `head[L-1] * ratio^(n-L)`.
    Explicit {
        #[serde(with = "ratvec")]
        head: Vec<BigRational>,
        #[serde(with = "ratstr")]
        ratio: BigRational,
    },
}

impl PhiSequence {
    pub fn geometric(ratio: BigRational) -> Self {
        PhiSequence::Geometric { ratio }
    }

    pub fn factorial_geometric(base: BigRational) -> Self {
        PhiSequence::FactorialGeometric { base }
    }

    pub fn explicit(head: Vec<BigRational>, ratio: BigRational) -> Self {
        PhiSequence::Explicit { head, ratio }
    }

    pub fn closed(&self) -> ClosedSeq {
        match self {
            PhiSequence::Geometric { ratio } => ClosedSeq::geometric(BigRational::one(), ratio.clone()),
            PhiSequence::FactorialGeometric { base } => {
                ClosedSeq::new(Vec::new(), BigRational::one(), base.recip(), -1)
            }
            PhiSequence::Explicit { head, ratio } => {
                let last = head.last().cloned().unwrap_or_else(BigRational::one);
                let l = head.len() as i64;
                let coef = last * rational::powi(ratio, -l);
                ClosedSeq::new(head.clone(), coef, ratio.clone(), 0)
            }
        }
    }

    pub fn term(&self, n: u32) -> BigRational {
        self.closed().term(n)
    }

    /// Every term strictly positive.
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            PhiSequence::Geometric { ratio } => ratio.is_positive(),
            PhiSequence::FactorialGeometric { base } => base.is_positive(),
            PhiSequence::Explicit { head, ratio } => {
                !head.is_empty() && ratio.is_positive() && head.iter().all(|h| h.is_positive())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("phi sequence must be positive: {self:?}")))
        }
    }

    /// Exact check that `phi_{n+1} <= phi_n` for all `n`.
    pub fn is_nonincreasing(&self) -> bool {
        match self {
            PhiSequence::Geometric { ratio } => *ratio <= BigRational::one(),
            // phi_{n+1}/phi_n = 1/((n+1) base), worst at n = 1
            PhiSequence::FactorialGeometric { base } => base * int(2) >= BigRational::one(),
            PhiSequence::Explicit { head, ratio } => {
                head.windows(2).all(|w| w[1] <= w[0]) && *ratio <= BigRational::one()
            }
        }
    }

    /// `max_{n <= up_to} phi_n`
    pub fn max_upto(&self, up_to: u32) -> BigRational {
        if self.is_nonincreasing() {
            return self.term(1);
        }
        (1..=up_to.max(1)).map(|n| self.term(n)).max().expect("nonempty range")
    }

    /// `min_{n <= up_to} phi_n`
    pub fn min_upto(&self, up_to: u32) -> BigRational {
        if self.is_nonincreasing() {
            return self.term(up_to.max(1));
        }
        (1..=up_to.max(1)).map(|n| self.term(n)).min().expect("nonempty range")
    }

    /// `sup_n phi_n`, when the closed form settles it.
    pub fn sup(&self) -> Option<BigRational> {
        match self {
            _ if self.is_nonincreasing() => Some(self.term(1)),
            PhiSequence::Explicit { head, ratio } if *ratio <= BigRational::one() => head.iter().max().cloned(),
            _ => None,
        }
    }
}

/// Cardinalities of a subgroup chain, as closed-form sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayerSizes {
    /// `|G_n| = p^n` (the Prüfer chain)
    PrimePower(u64),
    /// `t_n = n!` (rationals, used as the per-unit point count of `Z/t_n`)
    Factorial,
    /// A finite chain prefix `t_1 | ... | t_L`; nothing beyond layer `L`.
    Explicit(Vec<BigUint>),
}

impl LayerSizes {
    /// `n -> |G_n|`
    pub fn group_sizes(&self) -> ClosedSeq {
        match self {
            LayerSizes::PrimePower(p) => ClosedSeq::geometric(BigRational::one(), int(*p as i64)),
            LayerSizes::Factorial => ClosedSeq::new(Vec::new(), BigRational::one(), BigRational::one(), 1),
            LayerSizes::Explicit(terms) => ClosedSeq::new(
                terms.iter().map(rational::from_big).collect(),
                BigRational::zero(),
                BigRational::one(),
                0,
            ),
        }
    }

    /// Index of the last layer, if the chain is finite.
    pub fn last_layer(&self) -> Option<u32> {
        match self {
            LayerSizes::Explicit(terms) => Some(terms.len() as u32),
            _ => None,
        }
    }

    /// `n -> |U_n| = |G_n| - |G_{n-1}|` with `G_0` empty.
    pub fn layer_sizes(&self) -> ClosedSeq {
        match self {
            LayerSizes::PrimePower(p) => {
                let p = int(*p as i64);
                let coef = (&p - BigRational::one()) / &p;
                ClosedSeq::new(vec![p.clone()], coef, p, 0)
            }
            // n! - (n-1)! has no single closed term; bounded by n!
            LayerSizes::Factorial | LayerSizes::Explicit(_) => self.group_sizes(),
        }
    }

    pub fn group_size(&self, n: u32) -> BigInt {
        self.group_sizes().term(n).to_integer()
    }

    pub fn layer_size(&self, n: u32) -> BigInt {
        if n == 1 {
            return self.group_size(1);
        }
        self.group_size(n) - self.group_size(n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_mass_is_exact() {
        // sum (1/4)^n 2^n = 1
        let phi = PhiSequence::geometric(rat(1, 4));
        let mass = phi.closed().mul(&LayerSizes::PrimePower(2).group_sizes()).sum().unwrap();
        assert_eq!(mass, SeriesBound { value: int(1), exact: true });
        // sum 1/(n! 2^n) n! = 1
        let phi = PhiSequence::factorial_geometric(int(2));
        let mass = phi.closed().mul(&LayerSizes::Factorial.group_sizes()).sum().unwrap();
        assert_eq!(mass.value, int(1));
    }

    #[test]
    fn factorial_tail_bounds_the_sum() {
        // sum_{n>=1} 3^n / n! = e^3 - 1 ~ 19.0855
        let s = ClosedSeq::new(vec![], int(1), int(3), -1);
        let b = s.sum().unwrap();
        assert!(!b.exact);
        let v = rational::to_f64(&b.value);
        assert!(v >= 3f64.exp() - 1.0 && v < 3f64.exp() - 1.0 + 1e-3, "{v}");
        assert!(ClosedSeq::new(vec![], int(1), int(1), 1).sum().is_err());
        assert!(ClosedSeq::geometric(int(1), int(1)).sum().is_err());
    }

    #[test]
    fn layer_sizes_match_counts() {
        let s = LayerSizes::PrimePower(3);
        assert_eq!(s.layer_sizes().term(1), int(3));
        assert_eq!(s.layer_sizes().term(2), int(6));
        assert_eq!(s.layer_sizes().term(4), int(54));
        assert_eq!(s.layer_size(4), BigInt::from(54));
    }

    #[test]
    fn explicit_phi() {
        let phi = PhiSequence::explicit(vec![rat(1, 64), int(1)], rat(1, 4));
        assert_eq!(phi.term(2), int(1));
        assert_eq!(phi.term(4), rat(1, 16));
        assert!(!phi.is_nonincreasing());
        assert_eq!(phi.sup(), Some(int(1)));
        assert_eq!(phi.max_upto(3), int(1));
        assert!(PhiSequence::geometric(rat(1, 4)).is_nonincreasing());
        assert!(!PhiSequence::factorial_geometric(rat(1, 3)).is_nonincreasing());
    }
}
