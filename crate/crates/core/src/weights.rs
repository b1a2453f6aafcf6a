//! Weight functions built from the layered constructions, plus the named
//! formula weights used by the regularity checks.
//!
//! A [`WeightFn`] is immutable. Its provenance (construction tag and
//! parameters) is what certificates rely on for tail bounds, decay
//! constants and global lower bounds; nothing is inferred from sampling.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{even_floor, Chain, GroupDescriptor, GroupPoint};
use crate::interval::FloatInterval;
use crate::rational::{self, int, rat, ratstr, ratvec};
use crate::series::{LayerSizes, PhiSequence, SeriesBound};
use crate::sigma::{self, SigmaConstant};
use crate::value::Value;

pub const WEIGHT_SCHEMA: &str = "lpw.weight/v1";

/// Scan range used for the `C_2` enclosure attached to rationals weights.
pub const DEFAULT_SIGMA_SCAN: u64 = 1000;

/// Rational upper bound of `2 pi`.
pub fn two_pi_upper() -> BigRational {
    rat(31416, 5000)
}

/// `s(n) = 1/max(1,|n|)^2` on integers.
pub fn sigma_exact(n: &BigUint) -> BigRational {
    let b = if n.is_zero() { BigUint::one() } else { n.clone() };
    BigRational::new(1.into(), (&b * &b).into())
}

/// Named formula weights. Their growth is analysed from the formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `1 + t^2` on R
    Poly2,
    /// `e^{|t|}` on R
    ExpAbs,
    /// `(1 + t^2) e^{|t|}` on R
    Poly2Exp,
    /// `(1 + t^2) exp(|t| / log(e + |t|))` on R
    Poly2ExpLog,
    /// `(1 + t^2) e^t` on R
    Poly2Char,
    /// `t^{1/4}` on the circle `[0,1)`
    CircleQuarter,
    /// the constant 1 on R
    One,
}

impl Builtin {
    pub const ALL: [Builtin; 7] = [
        Builtin::Poly2,
        Builtin::ExpAbs,
        Builtin::Poly2Exp,
        Builtin::Poly2ExpLog,
        Builtin::Poly2Char,
        Builtin::CircleQuarter,
        Builtin::One,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Poly2 => "poly2",
            Builtin::ExpAbs => "exp-abs",
            Builtin::Poly2Exp => "poly2-exp",
            Builtin::Poly2ExpLog => "poly2-exp-log",
            Builtin::Poly2Char => "poly2-char",
            Builtin::CircleQuarter => "circle-quarter",
            Builtin::One => "one",
        }
    }

    pub fn parse(s: &str) -> Result<Builtin> {
        let s = s.strip_prefix("builtin:").unwrap_or(s);
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown builtin weight {s:?}")))
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        match self {
            Builtin::CircleQuarter => GroupDescriptor::Circle,
            _ => GroupDescriptor::Real { d: 1 },
        }
    }

    /// Value at a real `t` (or circle parameter `t` in `[0,1)`).
    pub fn eval_at(&self, t: &BigRational) -> Value {
        let poly = || Value::exact(BigRational::one() + t * t);
        match self {
            Builtin::Poly2 => poly(),
            Builtin::ExpAbs => Value::exp(t.abs()),
            Builtin::Poly2Exp => poly().mul(&Value::exp(t.abs())),
            Builtin::Poly2ExpLog => {
                let a = rational::to_f64(&t.abs());
                poly().mul(&Value::exp_float(a / (std::f64::consts::E + a).ln()))
            }
            Builtin::Poly2Char => poly().mul(&Value::exp(t.clone())),
            Builtin::CircleQuarter => Value::power(t.clone(), rat(1, 4)),
            Builtin::One => Value::one(),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which construction produced a weight, with everything needed to
/// rebuild it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", content = "params", rename_all = "kebab-case")]
pub enum Construction {
    /// `u = phi_n` on the layer `U_n` of a nested chain of finite subgroups.
    NestedFinite {
        phi: PhiSequence,
        /// certified upper bound of `sum phi_n |G_n|`
        #[serde(with = "ratstr")]
        mass: BigRational,
        mass_exact: bool,
        monotone: bool,
    },
    /// `u(q) = phi_n s(floor|q|)` for `q` in the layer `U_n` of `Q`.
    Rationals {
        phi: PhiSequence,
        /// certified upper bound of `sum phi_n t_n`
        #[serde(with = "ratstr")]
        mass: BigRational,
        mass_exact: bool,
        monotone: bool,
        /// enclosure of `C_2`
        c2_lo: f64,
        c2_hi: f64,
        sigma_scan: u64,
        /// `C = 8 C_2` (upper end, as an exact rational)
        #[serde(with = "ratstr")]
        c: BigRational,
    },
    /// `u(x) = a_{s(x)} prod_{j in s(x)} alpha_j u_j(x_j)`
    DirectSum {
        summands: Vec<WeightFn>,
        #[serde(with = "ratvec")]
        alphas: Vec<BigRational>,
        #[serde(with = "ratstr")]
        epsilon1: BigRational,
    },
    /// `prod_i 1/(1+x_i^2)`, optionally times `(2 pi)^{-d}`.
    Euclidean { d: usize, normalized: bool },
    /// `u(r, h) = u_R(r) u_H(h)`
    Product { real: Box<WeightFn>, discrete: Box<WeightFn> },
    /// `w = u^{-1/q}` (algebra weight for exponent `p`, `1/p + 1/q = 1`) or,
    /// with `inverse`, `u = w^{-q}`.
    Algebra {
        base: Box<WeightFn>,
        #[serde(with = "ratstr")]
        p: BigRational,
        inverse: bool,
        /// whether the base carried a (b)-certificate when this was built
        base_subconvolutive: bool,
    },
    Builtin { name: Builtin },
}

impl Construction {
    pub fn tag(&self) -> &'static str {
        match self {
            Construction::NestedFinite { .. } => "nested-finite",
            Construction::Rationals { .. } => "rationals",
            Construction::DirectSum { .. } => "direct-sum",
            Construction::Euclidean { .. } => "euclidean",
            Construction::Product { .. } => "product",
            Construction::Algebra { .. } => "algebra",
            Construction::Builtin { .. } => "builtin",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFn {
    descriptor: GroupDescriptor,
    construction: Construction,
    scale: BigRational,
    certificates: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct WeightRecord {
    schema: String,
    descriptor: GroupDescriptor,
    #[serde(flatten)]
    construction: Construction,
    #[serde(with = "ratstr")]
    scale: BigRational,
    exact: bool,
    certificates: Vec<String>,
}

impl Serialize for WeightFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WeightRecord {
            schema: WEIGHT_SCHEMA.into(),
            descriptor: self.descriptor.clone(),
            construction: self.construction.clone(),
            scale: self.scale.clone(),
            exact: self.is_exact(),
            certificates: self.certificates.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = WeightRecord::deserialize(d)?;
        if rec.schema != WEIGHT_SCHEMA {
            return Err(serde::de::Error::custom(format!("unsupported schema {:?}", rec.schema)));
        }
        WeightFn::rebuild(rec).map_err(serde::de::Error::custom)
    }
}

impl WeightFn {
    /// Re-derives a weight from its record, refusing records whose derived
    /// quantities (masses, constants, certificates) do not match.
    fn rebuild(rec: WeightRecord) -> Result<WeightFn> {
        let raw = match &rec.construction {
            Construction::NestedFinite { phi, monotone, .. } => {
                if *monotone {
                    nested_finite_weight(&rec.descriptor, phi.clone())?
                } else {
                    nested_finite_weight_unchecked(&rec.descriptor, phi.clone())?
                }
            }
            Construction::Rationals { phi, monotone, sigma_scan, .. } => {
                let chain = match &rec.descriptor {
                    GroupDescriptor::Rationals { chain } => chain.clone(),
                    other => return Err(Error::DescriptorMismatch(other.label())),
                };
                let sc = sigma::sigma_subconvolutive_constant(*sigma_scan);
                rationals_weight_with(chain, phi.clone(), &sc, !*monotone)?
            }
            Construction::DirectSum { summands, alphas, epsilon1 } => {
                let coeffs = SubsetCoeffs::new(epsilon1.clone())?;
                direct_sum_weight(summands.clone(), AlphaSequence::new(alphas.clone()), coeffs)?
            }
            Construction::Euclidean { d, normalized } => {
                let w = euclidean_weight(*d)?;
                if *normalized {
                    w.normalized_euclidean()?
                } else {
                    w
                }
            }
            Construction::Product { real, discrete } => product_weight((**real).clone(), (**discrete).clone())?,
            Construction::Algebra { base, p, inverse, .. } => {
                if *inverse {
                    algebra_inverse((**base).clone(), p.clone())?
                } else {
                    algebra_weight((**base).clone(), p.clone())?
                }
            }
            Construction::Builtin { name } => builtin_weight(*name),
        };
        if raw.descriptor != rec.descriptor || raw.construction != rec.construction {
            return Err(Error::InvalidParameter(
                "weight record does not match its re-derived construction".into(),
            ));
        }
        if !rec.scale.is_positive() {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        let w = WeightFn { scale: rec.scale, certificates: Vec::new(), ..raw };
        let w = w.with_certificates();
        if w.certificates != rec.certificates {
            return Err(Error::InvalidParameter(format!(
                "certificate list {:?} is not supported by the construction (expected {:?})",
                rec.certificates, w.certificates
            )));
        }
        Ok(w)
    }

    fn raw(descriptor: GroupDescriptor, construction: Construction) -> WeightFn {
        WeightFn { descriptor, construction, scale: BigRational::one(), certificates: Vec::new() }
            .with_certificates()
    }

    fn with_certificates(mut self) -> WeightFn {
        self.certificates.clear();
        if self.has_b_certificate() {
            self.certificates.push(format!("b:{}", self.construction.tag()));
        }
        self
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    pub fn certificates(&self) -> &[String] {
        &self.certificates
    }

    /// Values are exact rationals (given exact inputs).
    pub fn is_exact(&self) -> bool {
        match &self.construction {
            Construction::NestedFinite { .. } | Construction::Rationals { .. } => true,
            Construction::DirectSum { summands, .. } => summands.iter().all(|s| s.is_exact()),
            _ => false,
        }
    }

    /// Discrete group with an exact layered construction (convolutions are
    /// computable with closed-form tails).
    pub fn is_discrete_exact(&self) -> bool {
        self.is_exact()
    }

    /// Multiply by a positive rational.
    pub fn scaled(&self, c: &BigRational) -> Result<WeightFn> {
        if !c.is_positive() {
            return Err(Error::InvalidParameter("scale factor must be positive".into()));
        }
        Ok(WeightFn { scale: &self.scale * c, ..self.clone() }.with_certificates())
    }

    pub fn eval(&self, x: &GroupPoint) -> Result<Value> {
        if !self.descriptor.contains(x) {
            return Err(Error::DescriptorMismatch(format!("{x} is not an element of {}", self.descriptor.label())));
        }
        Ok(self.eval_raw(x)?.scale(&self.scale))
    }

    /// Value as an exact rational; errors for non-rational values.
    pub fn eval_exact(&self, x: &GroupPoint) -> Result<BigRational> {
        let v = self.eval(x)?;
        v.as_rational()
            .ok_or_else(|| Error::NotCertifiable(format!("value {v} at {x} is not rational")))
    }

    fn eval_raw(&self, x: &GroupPoint) -> Result<Value> {
        match (&self.construction, x) {
            (Construction::NestedFinite { phi, .. }, _) => {
                Ok(Value::exact(phi.term(self.descriptor.layer_of(x)?)))
            }
            (Construction::Rationals { phi, .. }, GroupPoint::Rational(q)) => {
                let n = self.descriptor.layer_of(x)?;
                Ok(Value::exact(phi.term(n) * sigma_exact(&even_floor(&q.0))))
            }
            (Construction::DirectSum { summands, alphas, epsilon1 }, GroupPoint::Sum(s)) => {
                let support: Vec<usize> = s.support().collect();
                let mut v = Value::exact(subset_coeff(epsilon1, &support));
                for (j, xj) in s.coords() {
                    let uj = summands[j - 1].eval(xj)?;
                    v = v.mul(&uj).scale(&alphas[j - 1]);
                }
                Ok(v)
            }
            (Construction::Euclidean { normalized, .. }, GroupPoint::Real(r)) => {
                let mut q = BigRational::one();
                for c in &r.0 {
                    let c = rational::from_f64(*c)?;
                    q /= BigRational::one() + &c * &c;
                }
                let v = Value::exact(q);
                Ok(if *normalized { v.mul(&Value::exp_float(-(r.0.len() as f64) * std::f64::consts::TAU.ln())) } else { v })
            }
            (Construction::Product { real, discrete }, GroupPoint::Product(pp)) => {
                let r = real.eval(&GroupPoint::Real(pp.real.clone()))?;
                Ok(r.mul(&discrete.eval(&pp.discrete)?))
            }
            (Construction::Algebra { base, p, inverse, .. }, _) => base.eval(x)?.pow(&algebra_exponent(p, *inverse)),
            (Construction::Builtin { name }, GroupPoint::Real(r)) => Ok(name.eval_at(&rational::from_f64(r.0[0])?)),
            (Construction::Builtin { name }, GroupPoint::Circle(c)) => Ok(name.eval_at(c.t())),
            _ => Err(Error::DescriptorMismatch(format!("{x} for {}", self.construction.tag()))),
        }
    }

    /// Bound `B` with `u*u <= B u` everywhere, established by the
    /// construction itself (scale included).
    pub fn proven_b_bound(&self) -> Option<BigRational> {
        let raw = match &self.construction {
            Construction::NestedFinite { mass, monotone: true, .. } => int(2) * mass,
            Construction::Rationals { mass, monotone: true, c, .. } => int(2) * c * mass,
            Construction::DirectSum { .. } => BigRational::one(),
            Construction::Euclidean { normalized: true, .. } => BigRational::one(),
            Construction::Euclidean { d, normalized: false } => rational::powi(&two_pi_upper(), *d as i64),
            Construction::Product { real, discrete } => real.proven_b_bound()? * discrete.proven_b_bound()?,
            _ => return None,
        };
        Some(raw * &self.scale)
    }

    /// `u*u <= u` is established by the construction.
    pub fn has_b_certificate(&self) -> bool {
        self.proven_b_bound().is_some_and(|b| b <= BigRational::one())
    }

    /// Upper bound of `sup u` from the construction.
    pub fn sup_bound(&self) -> Option<Value> {
        let raw = match &self.construction {
            Construction::NestedFinite { phi, .. } | Construction::Rationals { phi, .. } => Value::exact(phi.sup()?),
            Construction::DirectSum { summands, alphas, epsilon1 } => {
                let mut v = Value::exact(epsilon1.clone());
                for (s, a) in summands.iter().zip(alphas) {
                    let b = s.sup_bound()?.scale(a);
                    if b.compare(&Value::one())? == std::cmp::Ordering::Greater {
                        v = v.mul(&b);
                    }
                }
                v
            }
            Construction::Euclidean { d, normalized } => {
                if *normalized {
                    Value::exp_float(-(*d as f64) * std::f64::consts::TAU.ln())
                } else {
                    Value::one()
                }
            }
            Construction::Product { real, discrete } => real.sup_bound()?.mul(&discrete.sup_bound()?),
            Construction::Algebra { base, p, inverse, .. } => {
                let e = algebra_exponent(p, *inverse);
                // w = base^e with e < 0 is bounded above by (inf base)^e
                base.inf_bound()?.pow(&e).ok()?
            }
            Construction::Builtin { name: Builtin::One } => Value::one(),
            Construction::Builtin { name: Builtin::CircleQuarter } => Value::one(),
            Construction::Builtin { .. } => return None,
        };
        Some(raw.scale(&self.scale))
    }

    /// Lower bound of `inf w` from the construction (`0` when the weight
    /// is known to approach 0).
    pub fn inf_bound(&self) -> Option<Value> {
        let raw = match &self.construction {
            Construction::NestedFinite { .. } | Construction::Rationals { .. } | Construction::DirectSum { .. } => {
                Value::zero()
            }
            Construction::Euclidean { .. } | Construction::Product { .. } => Value::zero(),
            Construction::Algebra { base, p, inverse, .. } => {
                let e = algebra_exponent(p, *inverse);
                base.sup_bound()?.pow(&e).ok()?
            }
            Construction::Builtin { name } => match name {
                Builtin::Poly2 | Builtin::ExpAbs | Builtin::Poly2Exp | Builtin::Poly2ExpLog | Builtin::One => {
                    Value::one()
                }
                Builtin::Poly2Char | Builtin::CircleQuarter => Value::zero(),
            },
        };
        Some(raw.scale(&self.scale))
    }

    /// The `phi` sequence of a layered construction.
    pub fn phi(&self) -> Option<&PhiSequence> {
        match &self.construction {
            Construction::NestedFinite { phi, .. } | Construction::Rationals { phi, .. } => Some(phi),
            _ => None,
        }
    }

    pub fn builtin(&self) -> Option<Builtin> {
        match &self.construction {
            Construction::Builtin { name } => Some(*name),
            _ => None,
        }
    }

    /// Short summary line for reports.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} on {}, scale {}, exact {}",
            self.construction.tag(),
            self.descriptor.label(),
            rational::fmt_rational(&self.scale),
            self.is_exact()
        );
        match &self.construction {
            Construction::NestedFinite { mass, mass_exact, .. } | Construction::Rationals { mass, mass_exact, .. } => {
                s += &format!(
                    ", phi mass {} {}",
                    if *mass_exact { "=" } else { "<=" },
                    rational::fmt_rational(mass)
                );
            }
            _ => {}
        }
        if let Construction::Rationals { c, .. } = &self.construction {
            s += &format!(", C = 8 C2 <= {}", rational::fmt_rational(c));
        }
        if let Some(b) = self.proven_b_bound() {
            s += &format!(", u*u <= {} u", rational::fmt_rational(&b));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weights serialize")
    }

    pub fn from_json(s: &str) -> Result<WeightFn> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn algebra_exponent(p: &BigRational, inverse: bool) -> BigRational {
    // 1/q = (p-1)/p
    let inv_q = (p - BigRational::one()) / p;
    if inverse {
        -inv_q.recip()
    } else {
        -inv_q
    }
}

fn layer_sizes(descriptor: &GroupDescriptor) -> Result<LayerSizes> {
    match descriptor {
        GroupDescriptor::Pruefer { p } => Ok(LayerSizes::PrimePower(*p)),
        GroupDescriptor::Rationals { chain: Chain::Factorial } => Ok(LayerSizes::Factorial),
        GroupDescriptor::Rationals { chain: Chain::Explicit { terms } } => Ok(LayerSizes::Explicit(terms.clone())),
        other => Err(Error::NoChain(other.label())),
    }
}

fn certified_mass(phi: &PhiSequence, sizes: &LayerSizes) -> Result<SeriesBound> {
    phi.validate()?;
    phi.closed()
        .mul(&sizes.group_sizes())
        .sum()
        .map_err(|e| Error::MassNotCertifiable(e.to_string()))
}

/// `u = phi_n` on `U_n`, for a group with a chain of finite subgroups.
pub fn nested_finite_weight(descriptor: &GroupDescriptor, phi: PhiSequence) -> Result<WeightFn> {
    if !phi.is_nonincreasing() {
        return Err(Error::InvalidParameter("phi must be nonincreasing".into()));
    }
    nested_finite_weight_unchecked(descriptor, phi)
}

/// As [`nested_finite_weight`] but accepting a non-monotone `phi`; such a
/// weight carries no (b)-certificate. Used for negative controls.
pub fn nested_finite_weight_unchecked(descriptor: &GroupDescriptor, phi: PhiSequence) -> Result<WeightFn> {
    descriptor.validate()?;
    if !matches!(descriptor, GroupDescriptor::Pruefer { .. }) {
        return Err(Error::NoChain(descriptor.label()));
    }
    let mass = certified_mass(&phi, &layer_sizes(descriptor)?)?;
    let monotone = phi.is_nonincreasing();
    Ok(WeightFn::raw(
        descriptor.clone(),
        Construction::NestedFinite { phi, mass: mass.value, mass_exact: mass.exact, monotone },
    ))
}

/// Nested-finite weight on `Z(p^inf)` with `phi_n = (2p)^{-n}`.
pub fn pruefer_weight(p: u64) -> Result<WeightFn> {
    if !rational::is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    nested_finite_weight(&GroupDescriptor::Pruefer { p }, PhiSequence::geometric(rat(1, 2 * p as i64)))
}

/// Default `phi_n = 1/(n! 2^n)` for the rationals.
pub fn default_rationals_phi() -> PhiSequence {
    PhiSequence::factorial_geometric(int(2))
}

/// `u(q) = phi_n s(floor|q|)` on the layers of `Q`.
pub fn rationals_weight(chain: Chain, phi: PhiSequence) -> Result<WeightFn> {
    let sc = sigma::sigma_subconvolutive_constant(DEFAULT_SIGMA_SCAN);
    rationals_weight_with(chain, phi, &sc, false)
}

/// As [`rationals_weight`] with a precomputed `C_2` enclosure.
pub fn rationals_weight_with(
    chain: Chain,
    phi: PhiSequence,
    sc: &SigmaConstant,
    allow_nonmonotone: bool,
) -> Result<WeightFn> {
    let descriptor = GroupDescriptor::Rationals { chain };
    descriptor.validate()?;
    if !allow_nonmonotone && !phi.is_nonincreasing() {
        return Err(Error::InvalidParameter("phi must be nonincreasing".into()));
    }
    let mass = certified_mass(&phi, &layer_sizes(&descriptor)?)?;
    let c = int(8) * rational::from_f64(sc.c2.hi)?;
    let monotone = phi.is_nonincreasing();
    Ok(WeightFn::raw(
        descriptor,
        Construction::Rationals {
            phi,
            mass: mass.value,
            mass_exact: mass.exact,
            monotone,
            c2_lo: sc.c2.lo,
            c2_hi: sc.c2.hi,
            sigma_scan: sc.scanned_up_to,
            c,
        },
    ))
}

/// `a_s = eps1 / sum_{j in s} j!`, `a_{} = eps1`.
pub fn subset_coeff(epsilon1: &BigRational, s: &[usize]) -> BigRational {
    if s.is_empty() {
        return epsilon1.clone();
    }
    let denom: BigUint = s.iter().map(|&j| rational::factorial(j as u32)).sum();
    epsilon1 / rational::from_big(&denom)
}

/// The subset coefficients `a_s`, validated so that
/// `2 sum_{v proper subset of s} a_v <= 2 eps1 e^2 <= 1/4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetCoeffs {
    epsilon1: BigRational,
}

impl SubsetCoeffs {
    pub fn new(epsilon1: BigRational) -> Result<Self> {
        if !epsilon1.is_positive() || epsilon1 > BigRational::one() {
            return Err(Error::InvalidParameter("eps1 must lie in (0, 1]".into()));
        }
        let (_, e2_hi) = rational::exp_bounds(&int(2));
        if &epsilon1 * e2_hi > rat(1, 8) {
            return Err(Error::InvalidParameter(format!(
                "eps1 = {} is too large: eps1 e^2 must not exceed 1/8",
                rational::fmt_rational(&epsilon1)
            )));
        }
        Ok(SubsetCoeffs { epsilon1 })
    }

    pub fn epsilon1(&self) -> &BigRational {
        &self.epsilon1
    }

    pub fn coeff(&self, s: &[usize]) -> BigRational {
        subset_coeff(&self.epsilon1, s)
    }
}

/// `eps1 = 1/60`
pub fn default_coeffs() -> SubsetCoeffs {
    SubsetCoeffs::new(rat(1, 60)).expect("1/60 is admissible")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaSequence {
    alphas: Vec<BigRational>,
}

impl AlphaSequence {
    pub fn new(alphas: Vec<BigRational>) -> Self {
        AlphaSequence { alphas }
    }

    pub fn values(&self) -> &[BigRational] {
        &self.alphas
    }

    /// Checks `0 < a_j < 1`, `sum a_j < ln 2` and
    /// `sum a_j^2 u_j(0) < ln 2` (which bounds `prod (1 + a_j^2 (u_j*u_j)(0))`
    /// by 2 once each `u_j*u_j <= u_j`).
    pub fn validate(&self, summands: &[WeightFn]) -> Result<()> {
        if self.alphas.len() != summands.len() {
            return Err(Error::InvalidParameter(format!(
                "{} alphas for {} summands",
                self.alphas.len(),
                summands.len()
            )));
        }
        let one = BigRational::one();
        if self.alphas.iter().any(|a| !a.is_positive() || *a >= one) {
            return Err(Error::InvalidParameter("every alpha must lie in (0, 1)".into()));
        }
        let ln2 = rational::ln2_lower();
        let total: BigRational = self.alphas.iter().sum();
        if total >= ln2 {
            return Err(Error::InvalidParameter("sum of alphas must stay below ln 2".into()));
        }
        let mut zero_sum = BigRational::zero();
        for (a, u) in self.alphas.iter().zip(summands) {
            zero_sum += a * a * u.eval_exact(&u.descriptor.identity())?;
        }
        if zero_sum >= ln2 {
            return Err(Error::InvalidParameter("sum alpha_j^2 u_j(0) must stay below ln 2".into()));
        }
        Ok(())
    }
}

/// `alpha_j = 3^{-j} / max(1, u_j(0))`
pub fn default_alphas(summands: &[WeightFn]) -> Result<AlphaSequence> {
    summands
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let u0 = u.eval_exact(&u.descriptor.identity())?;
            Ok(rational::powi(&int(3), -(i as i64 + 1)) / u0.max(BigRational::one()))
        })
        .collect::<Result<Vec<_>>>()
        .map(AlphaSequence::new)
}

/// Weight on the direct sum of the summands' groups.
pub fn direct_sum_weight(summands: Vec<WeightFn>, alpha: AlphaSequence, coeffs: SubsetCoeffs) -> Result<WeightFn> {
    if summands.is_empty() {
        return Err(Error::InvalidParameter("direct sum needs at least one summand".into()));
    }
    for (i, u) in summands.iter().enumerate() {
        if !u.has_b_certificate() {
            return Err(Error::MissingBCertificate(i + 1));
        }
        if !u.is_exact() {
            return Err(Error::InvalidParameter(format!("summand {} is not an exact discrete weight", i + 1)));
        }
    }
    alpha.validate(&summands)?;
    let descriptor = GroupDescriptor::Sum { summands: summands.iter().map(|u| u.descriptor.clone()).collect() };
    Ok(WeightFn::raw(
        descriptor,
        Construction::DirectSum { summands, alphas: alpha.alphas, epsilon1: coeffs.epsilon1 },
    ))
}

/// `prod 1/(1+x_i^2)` on `R^d`.
pub fn euclidean_weight(d: usize) -> Result<WeightFn> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(WeightFn::raw(GroupDescriptor::Real { d }, Construction::Euclidean { d, normalized: false }))
}

impl WeightFn {
    /// Euclidean weight times `(2 pi)^{-d}`, which makes `u*u <= u`.
    pub fn normalized_euclidean(&self) -> Result<WeightFn> {
        match &self.construction {
            Construction::Euclidean { d, .. } => Ok(WeightFn::raw(
                self.descriptor.clone(),
                Construction::Euclidean { d: *d, normalized: true },
            )),
            _ => Err(Error::InvalidParameter("not a Euclidean weight".into())),
        }
    }
}

/// `u(r, h) = u_R(r) u_H(h)` on `R^d x H`.
pub fn product_weight(real: WeightFn, discrete: WeightFn) -> Result<WeightFn> {
    let d = match real.construction {
        Construction::Euclidean { d, .. } => d,
        _ => return Err(Error::DescriptorMismatch("first factor must be a Euclidean weight".into())),
    };
    if !discrete.is_exact() {
        return Err(Error::DescriptorMismatch("second factor must be an exact discrete weight".into()));
    }
    let descriptor = GroupDescriptor::Product { d, discrete: Box::new(discrete.descriptor.clone()) };
    descriptor.validate()?;
    Ok(WeightFn::raw(descriptor, Construction::Product { real: Box::new(real), discrete: Box::new(discrete) }))
}

fn check_exponent(p: &BigRational) -> Result<()> {
    if *p <= BigRational::one() {
        return Err(Error::InvalidParameter(format!("exponent p = {} must exceed 1", rational::fmt_rational(p))));
    }
    Ok(())
}

/// `w = u^{-1/q}` with `1/p + 1/q = 1`.
pub fn algebra_weight(u: WeightFn, p: BigRational) -> Result<WeightFn> {
    check_exponent(&p)?;
    let base_subconvolutive = u.has_b_certificate();
    Ok(WeightFn::raw(
        u.descriptor.clone(),
        Construction::Algebra { base: Box::new(u), p, inverse: false, base_subconvolutive },
    ))
}

/// `u = w^{-q}`: the subconvolutive side of an algebra weight `w`.
pub fn algebra_inverse(w: WeightFn, p: BigRational) -> Result<WeightFn> {
    check_exponent(&p)?;
    Ok(WeightFn::raw(
        w.descriptor.clone(),
        Construction::Algebra { base: Box::new(w), p, inverse: true, base_subconvolutive: false },
    ))
}

/// `u / bound`. When the construction proves `u*u <= bound u`, the result
/// carries a (b)-certificate.
pub fn scale_for_b(u: &WeightFn, bound: &BigRational) -> Result<WeightFn> {
    if !bound.is_positive() {
        return Err(Error::InvalidParameter("bound must be positive".into()));
    }
    u.scaled(&bound.recip())
}

pub fn builtin_weight(name: Builtin) -> WeightFn {
    WeightFn::raw(name.descriptor(), Construction::Builtin { name })
}

/// `|G_n|` for the chain of a layered weight, as used by the convolution
/// engine.
pub fn chain_sizes(u: &WeightFn) -> Result<LayerSizes> {
    layer_sizes(&u.descriptor)
}

/// `(mass, exact)` of a layered construction.
pub fn phi_mass(u: &WeightFn) -> Option<(BigRational, bool)> {
    match &u.construction {
        Construction::NestedFinite { mass, mass_exact, .. } | Construction::Rationals { mass, mass_exact, .. } => {
            Some((mass.clone(), *mass_exact))
        }
        _ => None,
    }
}

/// Outward enclosure of a value.
pub fn value_interval(v: &Value) -> FloatInterval {
    match v.as_rational() {
        Some(q) => FloatInterval::around(rational::to_f64(&q)),
        None => {
            let x = v.to_f64();
            FloatInterval::with_error(x, x.abs() * 1e-13)
        }
    }
}

/// Exponent of the algebra weight's defining power.
pub fn exponent_of(u: &WeightFn) -> Option<BigRational> {
    match &u.construction {
        Construction::Algebra { p, inverse, .. } => Some(algebra_exponent(p, *inverse)),
        _ => None,
    }
}

pub fn to_u32(x: &BigRational) -> Option<u32> {
    x.to_integer().to_u32()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::SumPoint;

    fn pt(p: u64, k: i64, n: u32) -> GroupPoint {
        GroupPoint::pruefer(p, k, n)
    }

    #[test]
    fn pruefer_values() {
        let u = pruefer_weight(2).unwrap();
        assert_eq!(u.eval_exact(&pt(2, 1, 1)).unwrap(), rat(1, 4));
        assert_eq!(u.eval_exact(&pt(2, 3, 3)).unwrap(), rat(1, 64));
        assert_eq!(u.eval_exact(&pt(2, 0, 0)).unwrap(), rat(1, 4));
        assert_eq!(phi_mass(&u), Some((int(1), true)));
        assert_eq!(pruefer_weight(3).unwrap().eval_exact(&pt(3, 1, 1)).unwrap(), rat(1, 6));
        assert!(pruefer_weight(4).is_err());
        assert!(!u.has_b_certificate());
        let half = scale_for_b(&u, &int(2)).unwrap();
        assert!(half.has_b_certificate());
        assert_eq!(half.certificates(), ["b:nested-finite"]);
    }

    #[test]
    fn rationals_values() {
        let sc = sigma::sigma_subconvolutive_constant(100);
        let u = rationals_weight_with(Chain::Factorial, default_rationals_phi(), &sc, false).unwrap();
        let q = |n, d| GroupPoint::rational(rat(n, d));
        assert_eq!(u.eval_exact(&q(0, 1)).unwrap(), rat(1, 2));
        assert_eq!(u.eval_exact(&q(5, 2)).unwrap(), rat(1, 32));
        assert_eq!(u.eval_exact(&q(-5, 2)).unwrap(), rat(1, 32));
        assert_eq!(phi_mass(&u).unwrap().0, int(1));
    }

    #[test]
    fn direct_sum_values() {
        let s2 = scale_for_b(&pruefer_weight(2).unwrap(), &int(2)).unwrap();
        let s3 = scale_for_b(&pruefer_weight(3).unwrap(), &int(2)).unwrap();
        let summands = vec![s2.clone(), s3.clone()];
        let alphas = default_alphas(&summands).unwrap();
        assert_eq!(alphas.values(), [rat(1, 3), rat(1, 9)]);
        let u = direct_sum_weight(summands, alphas, default_coeffs()).unwrap();
        assert_eq!(u.eval_exact(&u.descriptor().identity()).unwrap(), rat(1, 60));
        let x = GroupPoint::sum([(1, pt(2, 1, 1))]);
        assert_eq!(u.eval_exact(&x).unwrap(), rat(1, 60) * rat(1, 3) * rat(1, 8));
        let x = GroupPoint::Sum(SumPoint::new([(1, pt(2, 1, 1)), (2, pt(3, 1, 1))]));
        assert_eq!(u.eval_exact(&x).unwrap(), rat(1, 180) * rat(1, 27) * rat(1, 8) * rat(1, 12));
        assert_eq!(default_coeffs().coeff(&[1, 2]), rat(1, 180));
        let raw = pruefer_weight(2).unwrap();
        assert_eq!(
            direct_sum_weight(vec![raw.clone()], default_alphas(&[raw]).unwrap(), default_coeffs()),
            Err(Error::MissingBCertificate(1))
        );
        assert!(SubsetCoeffs::new(rat(1, 50)).is_err());
    }

    #[test]
    fn algebra_values() {
        let u = pruefer_weight(2).unwrap();
        let w = algebra_weight(u, int(2)).unwrap();
        assert_eq!(w.eval_exact(&pt(2, 1, 1)).unwrap(), int(2));
        let u8 = nested_finite_weight(&GroupDescriptor::Pruefer { p: 2 }, PhiSequence::geometric(rat(1, 8))).unwrap();
        let w3 = algebra_weight(u8, int(3)).unwrap();
        assert_eq!(w3.eval_exact(&pt(2, 1, 1)).unwrap(), int(4));
        assert!(algebra_weight(pruefer_weight(2).unwrap(), int(1)).is_err());
        let circ = builtin_weight(Builtin::CircleQuarter);
        let inv = algebra_inverse(circ, int(2)).unwrap();
        let v = inv.eval(&GroupPoint::circle(rat(1, 4))).unwrap();
        assert_eq!(v.as_rational(), Some(int(2)));
    }

    #[test]
    fn euclidean_and_product() {
        let e = euclidean_weight(1).unwrap();
        assert_eq!(e.eval(&GroupPoint::real(vec![0.0]).unwrap()).unwrap().as_rational(), Some(int(1)));
        let h = scale_for_b(&pruefer_weight(2).unwrap(), &int(2)).unwrap();
        let pw = product_weight(e, h).unwrap();
        let x = pw.descriptor().parse_point("1|1/2").unwrap();
        assert_eq!(pw.eval(&x).unwrap().as_rational(), Some(rat(1, 16)));
        assert_eq!(pw.eval(&x).unwrap(), pw.eval(&x.neg()).unwrap());
    }

    #[test]
    fn records_round_trip() {
        let s2 = scale_for_b(&pruefer_weight(2).unwrap(), &int(2)).unwrap();
        let s3 = scale_for_b(&pruefer_weight(3).unwrap(), &int(2)).unwrap();
        let summands = vec![s2, s3];
        let u = direct_sum_weight(summands.clone(), default_alphas(&summands).unwrap(), default_coeffs()).unwrap();
        let js = u.to_json();
        assert_eq!(WeightFn::from_json(&js).unwrap(), u);
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(v["construction"], "direct-sum");
        assert_eq!(v["params"]["epsilon1"], "1/60");
        // a forged certificate list is refused
        let forged = js.replacen("\"certificates\": [\n    \"b:direct-sum\"\n  ]", "\"certificates\": []", 1);
        assert_ne!(forged, js);
        assert!(WeightFn::from_json(&forged).is_err());
        let w = algebra_weight(builtin_weight(Builtin::Poly2), int(2)).unwrap();
        assert_eq!(WeightFn::from_json(&w.to_json()).unwrap(), w);
    }
}
