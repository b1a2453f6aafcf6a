//! Exact element representations for the discrete abelian groups the weight
//! constructions live on: the Prüfer group `Z(p^inf)`, the rationals under
//! addition, finite direct sums, the circle `[0,1)` and products with `R^d`.
//!
//! Discrete variants are exact; `R^d` coordinates are floats.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, fmt_rational, parse_rational, ratstr};

/// `k / p^n` modulo 1, kept with `n` minimal and `0 <= k < p^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrueferPoint {
    p: u64,
    k: BigUint,
    n: u32,
}

impl PrueferPoint {
    pub fn new(p: u64, k: BigInt, n: u32) -> Self {
        let modulus = BigInt::from(p).pow(n);
        let k = k.mod_floor(&modulus).to_biguint().expect("mod_floor is nonnegative");
        Self::canonical(p, k, n)
    }

    fn canonical(p: u64, mut k: BigUint, mut n: u32) -> Self {
        let pb = BigUint::from(p);
        if k.is_zero() {
            return PrueferPoint { p, k, n: 0 };
        }
        while n > 0 && (&k % &pb).is_zero() {
            k /= &pb;
            n -= 1;
        }
        PrueferPoint { p, k, n }
    }

    pub fn zero(p: u64) -> Self {
        PrueferPoint { p, k: BigUint::zero(), n: 0 }
    }

    /// Reads a rational as an element of `Z(p^inf)`; the denominator must be
    /// a power of `p`.
    pub fn from_rational(p: u64, x: &BigRational) -> Result<Self> {
        let f = rational::frac(x);
        let mut d = f.denom().to_biguint().expect("denominators are positive");
        let pb = BigUint::from(p);
        let mut n = 0u32;
        while !d.is_one() {
            if !(&d % &pb).is_zero() {
                return Err(Error::DescriptorMismatch(format!(
                    "{} is not an element of Z({p}^inf)",
                    fmt_rational(x)
                )));
            }
            d /= &pb;
            n += 1;
        }
        Ok(Self::canonical(p, f.numer().to_biguint().unwrap_or_default(), n))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn numerator(&self) -> &BigUint {
        &self.k
    }

    pub fn exponent(&self) -> u32 {
        self.n
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(BigInt::from(self.k.clone()), BigInt::from(self.p).pow(self.n))
    }

    pub fn is_zero(&self) -> bool {
        self.k.is_zero()
    }

    /// Layer in the chain `G_n = {k/p^n}`; the identity sits in `G_1`.
    pub fn layer(&self) -> u32 {
        self.n.max(1)
    }

    fn add(&self, other: &Self) -> Self {
        let n = self.n.max(other.n);
        let pb = BigUint::from(self.p);
        let a = &self.k * pb.pow(n - self.n);
        let b = &other.k * pb.pow(n - other.n);
        let m = pb.pow(n);
        Self::canonical(self.p, (a + b) % m, n)
    }

    fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let m = BigUint::from(self.p).pow(self.n);
        Self::canonical(self.p, m - &self.k, self.n)
    }

    fn nmul(&self, n: &BigInt) -> Self {
        let k = BigInt::from(self.k.clone()) * n;
        Self::new(self.p, k, self.n)
    }
}

/// Element of `(Q, +)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint(pub BigRational);

/// Point of the circle `[0, 1)` with addition modulo 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CirclePoint(BigRational);

impl CirclePoint {
    pub fn new(t: BigRational) -> Self {
        CirclePoint(rational::frac(&t))
    }

    pub fn t(&self) -> &BigRational {
        &self.0
    }
}

/// Element of a direct sum: finitely many nonzero coordinates, indexed from 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SumPoint {
    coords: BTreeMap<usize, GroupPoint>,
}

impl SumPoint {
    pub fn new(coords: impl IntoIterator<Item = (usize, GroupPoint)>) -> Self {
        SumPoint {
            coords: coords.into_iter().filter(|(_, x)| !x.is_zero()).collect(),
        }
    }

    pub fn coords(&self) -> &BTreeMap<usize, GroupPoint> {
        &self.coords
    }

    pub fn get(&self, j: usize) -> Option<&GroupPoint> {
        self.coords.get(&j)
    }

    /// Support `s(x)`.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coords.keys().copied()
    }
}

#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct RealPoint(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct ProductPoint {
    pub real: RealPoint,
    pub discrete: Box<GroupPoint>,
}

/// Any group element the library can evaluate a weight at.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub enum GroupPoint {
    Pruefer(PrueferPoint),
    Rational(RationalPoint),
    Sum(SumPoint),
    Circle(CirclePoint),
    Real(RealPoint),
    Product(ProductPoint),
}

// Real coordinates never hold NaN (constructors reject it), so equality is total.
impl Eq for GroupPoint {}
impl Eq for RealPoint {}
impl Eq for ProductPoint {}

// consistent with the derived order, which is total without NaN
#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for GroupPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl std::hash::Hash for GroupPoint {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            GroupPoint::Pruefer(x) => x.hash(state),
            GroupPoint::Rational(x) => x.hash(state),
            GroupPoint::Sum(x) => x.hash(state),
            GroupPoint::Circle(x) => x.hash(state),
            GroupPoint::Real(x) => x.0.iter().for_each(|v| v.to_bits().hash(state)),
            GroupPoint::Product(x) => {
                x.real.0.iter().for_each(|v| v.to_bits().hash(state));
                x.discrete.hash(state);
            }
        }
    }
}

fn mismatch(x: &GroupPoint, y: &GroupPoint) -> Error {
    Error::DescriptorMismatch(format!("cannot combine {x} with {y}"))
}

impl GroupPoint {
    pub fn pruefer(p: u64, k: i64, n: u32) -> Self {
        GroupPoint::Pruefer(PrueferPoint::new(p, BigInt::from(k), n))
    }

    pub fn rational(x: BigRational) -> Self {
        GroupPoint::Rational(RationalPoint(x))
    }

    pub fn circle(t: BigRational) -> Self {
        GroupPoint::Circle(CirclePoint::new(t))
    }

    pub fn real(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("real coordinates must be finite".into()));
        }
        // -0.0 and 0.0 are the same point
        Ok(GroupPoint::Real(RealPoint(coords.into_iter().map(|v| v + 0.0).collect())))
    }

    pub fn sum(coords: impl IntoIterator<Item = (usize, GroupPoint)>) -> Self {
        GroupPoint::Sum(SumPoint::new(coords))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GroupPoint::Pruefer(x) => x.is_zero(),
            GroupPoint::Rational(x) => x.0.is_zero(),
            GroupPoint::Sum(x) => x.coords.is_empty(),
            GroupPoint::Circle(x) => x.0.is_zero(),
            GroupPoint::Real(x) => x.0.iter().all(|v| *v == 0.0),
            GroupPoint::Product(x) => x.real.0.iter().all(|v| *v == 0.0) && x.discrete.is_zero(),
        }
    }

    pub fn add(&self, other: &GroupPoint) -> Result<GroupPoint> {
        use GroupPoint::*;
        Ok(match (self, other) {
            (Pruefer(a), Pruefer(b)) if a.p == b.p => Pruefer(a.add(b)),
            (Rational(a), Rational(b)) => Rational(RationalPoint(&a.0 + &b.0)),
            (Circle(a), Circle(b)) => Circle(CirclePoint::new(&a.0 + &b.0)),
            (Sum(a), Sum(b)) => {
                let mut coords = a.coords.clone();
                for (j, yb) in &b.coords {
                    let merged = match coords.get(j) {
                        Some(ya) => ya.add(yb)?,
                        None => yb.clone(),
                    };
                    if merged.is_zero() {
                        coords.remove(j);
                    } else {
                        coords.insert(*j, merged);
                    }
                }
                Sum(SumPoint { coords })
            }
            (Real(a), Real(b)) if a.0.len() == b.0.len() => {
                Real(RealPoint(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect()))
            }
            (Product(a), Product(b)) if a.real.0.len() == b.real.0.len() => {
                let real = RealPoint(a.real.0.iter().zip(&b.real.0).map(|(x, y)| x + y).collect());
                Product(ProductPoint {
                    real,
                    discrete: Box::new(a.discrete.add(&b.discrete)?),
                })
            }
            _ => return Err(mismatch(self, other)),
        })
    }

    pub fn neg(&self) -> GroupPoint {
        use GroupPoint::*;
        match self {
            Pruefer(a) => Pruefer(a.neg()),
            Rational(a) => Rational(RationalPoint(-&a.0)),
            Circle(a) => Circle(CirclePoint::new(-&a.0)),
            Sum(a) => Sum(SumPoint {
                coords: a.coords.iter().map(|(j, x)| (*j, x.neg())).collect(),
            }),
            Real(a) => Real(RealPoint(a.0.iter().map(|v| -v + 0.0).collect())),
            Product(a) => Product(ProductPoint {
                real: RealPoint(a.real.0.iter().map(|v| -v + 0.0).collect()),
                discrete: Box::new(a.discrete.neg()),
            }),
        }
    }

    pub fn sub(&self, other: &GroupPoint) -> Result<GroupPoint> {
        self.add(&other.neg())
    }

    /// `n`-fold sum; `nmul(0, x)` is the identity.
    pub fn nmul(&self, n: i64) -> GroupPoint {
        self.nmul_big(&BigInt::from(n))
    }

    pub fn nmul_big(&self, n: &BigInt) -> GroupPoint {
        use GroupPoint::*;
        let nr = BigRational::from_integer(n.clone());
        let nf = n.to_f64().unwrap_or(f64::INFINITY);
        match self {
            Pruefer(a) => Pruefer(a.nmul(n)),
            Rational(a) => Rational(RationalPoint(&a.0 * &nr)),
            Circle(a) => Circle(CirclePoint::new(&a.0 * &nr)),
            Sum(a) => Sum(SumPoint::new(a.coords.iter().map(|(j, x)| (*j, x.nmul_big(n))))),
            Real(a) => Real(RealPoint(a.0.iter().map(|v| v * nf + 0.0).collect())),
            Product(a) => Product(ProductPoint {
                real: RealPoint(a.real.0.iter().map(|v| v * nf + 0.0).collect()),
                discrete: Box::new(a.discrete.nmul_big(n)),
            }),
        }
    }

    /// Rebuilds the canonical form (a no-op on values built through this API).
    pub fn canonicalize(&self) -> GroupPoint {
        use GroupPoint::*;
        match self {
            Pruefer(a) => Pruefer(PrueferPoint::canonical(a.p, a.k.clone(), a.n)),
            Circle(a) => Circle(CirclePoint::new(a.0.clone())),
            Sum(a) => Sum(SumPoint::new(a.coords.iter().map(|(j, x)| (*j, x.canonicalize())))),
            Product(a) => Product(ProductPoint {
                real: a.real.clone(),
                discrete: Box::new(a.discrete.canonicalize()),
            }),
            other => other.clone(),
        }
    }

    pub fn as_sum(&self) -> Option<&SumPoint> {
        match self {
            GroupPoint::Sum(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupPoint::Pruefer(x) => write!(f, "{}", fmt_rational(&x.value())),
            GroupPoint::Rational(x) => write!(f, "{}", fmt_rational(&x.0)),
            GroupPoint::Circle(x) => write!(f, "{}", fmt_rational(&x.0)),
            GroupPoint::Sum(x) => {
                write!(f, "{{")?;
                for (i, (j, v)) in x.coords.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{j}->{v}")?;
                }
                write!(f, "}}")
            }
            GroupPoint::Real(x) => write!(f, "{:?}", x.0),
            GroupPoint::Product(x) => write!(f, "({:?}, {})", x.real.0, x.discrete),
        }
    }
}

/// `floor(|x|)`: the even extension of the integer part from the half-line.
pub fn even_floor(x: &BigRational) -> BigUint {
    rational::floor_abs(x)
}

/// Subgroup chain `Q_n = Z / t_n` exhausting the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Chain {
    /// `t_n = n!`
    #[default]
    Factorial,
    /// Finite prefix `t_1 | t_2 | ...`, strictly increasing.
    Explicit {
        #[serde(with = "bigvec")]
        terms: Vec<BigUint>,
    },
}

mod bigvec {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl Chain {
    pub fn validate(&self) -> Result<()> {
        if let Chain::Explicit { terms } = self {
            if terms.is_empty() {
                return Err(Error::InvalidDescriptor("empty chain".into()));
            }
            if terms[0].is_zero() {
                return Err(Error::InvalidDescriptor("t_1 must be positive".into()));
            }
            for w in terms.windows(2) {
                if w[1] <= w[0] || !(&w[1] % &w[0]).is_zero() {
                    return Err(Error::InvalidDescriptor(format!(
                        "chain must be a strictly increasing divisibility chain ({} then {})",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `t_n` for `n >= 1`, if known.
    pub fn term(&self, n: u32) -> Option<BigUint> {
        match self {
            Chain::Factorial => Some(rational::factorial(n)),
            Chain::Explicit { terms } => terms.get(n.checked_sub(1)? as usize).cloned(),
        }
    }

    /// Least `n` with `x in Z/t_n`; the identity (and every integer when
    /// `t_1 = 1`) lands in layer 1.
    pub fn layer_of(&self, x: &BigRational) -> Result<u32> {
        let d = x.denom().to_biguint().expect("positive denominator");
        match self {
            Chain::Factorial => {
                let mut f = BigUint::one() % &d;
                let mut n = 1u32;
                loop {
                    f = (f * BigUint::from(n)) % &d;
                    if f.is_zero() {
                        return Ok(n);
                    }
                    n += 1;
                }
            }
            Chain::Explicit { terms } => terms
                .iter()
                .position(|t| (t % &d).is_zero())
                .map(|i| i as u32 + 1)
                .ok_or_else(|| Error::ChainExhausted {
                    point: fmt_rational(x),
                    terms: terms.len(),
                }),
        }
    }
}

/// Which group a point or weight belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum GroupDescriptor {
    Pruefer { p: u64 },
    Rationals {
        #[serde(default)]
        chain: Chain,
    },
    Sum { summands: Vec<GroupDescriptor> },
    Circle,
    Real { d: usize },
    Product { d: usize, discrete: Box<GroupDescriptor> },
}

impl GroupDescriptor {
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupDescriptor::Pruefer { p } if !rational::is_prime(*p) => {
                Err(Error::InvalidDescriptor(format!("{p} is not prime")))
            }
            GroupDescriptor::Rationals { chain } => chain.validate(),
            GroupDescriptor::Sum { summands } => {
                if summands.is_empty() {
                    return Err(Error::InvalidDescriptor("direct sum without summands".into()));
                }
                summands.iter().try_for_each(|s| s.validate())
            }
            GroupDescriptor::Product { discrete, .. } => {
                if matches!(**discrete, GroupDescriptor::Real { .. } | GroupDescriptor::Product { .. }) {
                    return Err(Error::InvalidDescriptor("product factor must be discrete".into()));
                }
                discrete.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupPoint {
        match self {
            GroupDescriptor::Pruefer { p } => GroupPoint::Pruefer(PrueferPoint::zero(*p)),
            GroupDescriptor::Rationals { .. } => GroupPoint::rational(BigRational::zero()),
            GroupDescriptor::Sum { .. } => GroupPoint::Sum(SumPoint::default()),
            GroupDescriptor::Circle => GroupPoint::circle(BigRational::zero()),
            GroupDescriptor::Real { d } => GroupPoint::Real(RealPoint(vec![0.0; *d])),
            GroupDescriptor::Product { d, discrete } => GroupPoint::Product(ProductPoint {
                real: RealPoint(vec![0.0; *d]),
                discrete: Box::new(discrete.identity()),
            }),
        }
    }

    pub fn contains(&self, x: &GroupPoint) -> bool {
        match (self, x) {
            (GroupDescriptor::Pruefer { p }, GroupPoint::Pruefer(a)) => a.p == *p,
            (GroupDescriptor::Rationals { chain }, GroupPoint::Rational(a)) => match chain {
                Chain::Factorial => true,
                Chain::Explicit { .. } => chain.layer_of(&a.0).is_ok(),
            },
            (GroupDescriptor::Sum { summands }, GroupPoint::Sum(a)) => a
                .coords
                .iter()
                .all(|(j, v)| *j >= 1 && summands.get(j - 1).is_some_and(|s| s.contains(v))),
            (GroupDescriptor::Circle, GroupPoint::Circle(_)) => true,
            (GroupDescriptor::Real { d }, GroupPoint::Real(a)) => a.0.len() == *d,
            (GroupDescriptor::Product { d, discrete }, GroupPoint::Product(a)) => {
                a.real.0.len() == *d && discrete.contains(&a.discrete)
            }
            _ => false,
        }
    }

    /// Sum with a membership check against this descriptor.
    pub fn add(&self, x: &GroupPoint, y: &GroupPoint) -> Result<GroupPoint> {
        for v in [x, y] {
            if !self.contains(v) {
                return Err(Error::DescriptorMismatch(format!("{v} is not an element of {}", self.label())));
            }
        }
        x.add(y)
    }

    /// Index of the chain layer `U_n = G_n \ G_{n-1}` containing `x`.
    pub fn layer_of(&self, x: &GroupPoint) -> Result<u32> {
        match (self, x) {
            (GroupDescriptor::Pruefer { p }, GroupPoint::Pruefer(a)) if a.p == *p => Ok(a.layer()),
            (GroupDescriptor::Rationals { chain }, GroupPoint::Rational(a)) => chain.layer_of(&a.0),
            (GroupDescriptor::Pruefer { .. } | GroupDescriptor::Rationals { .. }, _) => {
                Err(Error::DescriptorMismatch(format!("{x} is not an element of {}", self.label())))
            }
            _ => Err(Error::NoChain(self.label())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GroupDescriptor::Pruefer { p } => format!("Z({p}^inf)"),
            GroupDescriptor::Rationals { chain: Chain::Factorial } => "Q[t_n=n!]".into(),
            GroupDescriptor::Rationals { .. } => "Q[explicit chain]".into(),
            GroupDescriptor::Sum { summands } => {
                let parts: Vec<_> = summands.iter().map(|s| s.label()).collect();
                format!("sum({})", parts.join(", "))
            }
            GroupDescriptor::Circle => "T".into(),
            GroupDescriptor::Real { d } => format!("R^{d}"),
            GroupDescriptor::Product { d, discrete } => format!("R^{d} x {}", discrete.label()),
        }
    }

    /// Parses a point written in the CLI notation for this group:
    /// `3/8` (Prüfer, rationals, circle), `1.5` or `1,2` (reals),
    /// `1:1/2;2:1/3` (sums), `0.5|1/2` (products).
    pub fn parse_point(&self, s: &str) -> Result<GroupPoint> {
        let s = s.trim();
        match self {
            GroupDescriptor::Pruefer { p } => {
                Ok(GroupPoint::Pruefer(PrueferPoint::from_rational(*p, &parse_rational(s)?)?))
            }
            GroupDescriptor::Rationals { .. } => Ok(GroupPoint::rational(parse_rational(s)?)),
            GroupDescriptor::Circle => Ok(GroupPoint::circle(parse_rational(s)?)),
            GroupDescriptor::Real { d } => {
                let coords = parse_reals(s)?;
                if coords.len() != *d {
                    return Err(Error::Parse(format!("expected {d} coordinates in {s:?}")));
                }
                GroupPoint::real(coords)
            }
            GroupDescriptor::Sum { summands } => {
                let mut coords = Vec::new();
                for part in s.split(';').map(str::trim).filter(|p| !p.is_empty() && *p != "0") {
                    let (j, v) = part
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("expected j:value, got {part:?}")))?;
                    let j: usize = j.trim().parse().map_err(|_| Error::Parse(format!("bad index {j:?}")))?;
                    let summand = summands
                        .get(j.wrapping_sub(1))
                        .ok_or_else(|| Error::Parse(format!("no summand {j}")))?;
                    coords.push((j, summand.parse_point(v)?));
                }
                Ok(GroupPoint::sum(coords))
            }
            GroupDescriptor::Product { d, discrete } => {
                let (r, h) = s
                    .split_once('|')
                    .ok_or_else(|| Error::Parse(format!("expected real|discrete, got {s:?}")))?;
                let coords = parse_reals(r)?;
                if coords.len() != *d {
                    return Err(Error::Parse(format!("expected {d} real coordinates")));
                }
                Ok(GroupPoint::Product(ProductPoint {
                    real: RealPoint(coords),
                    discrete: Box::new(discrete.parse_point(h)?),
                }))
            }
        }
    }
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .or_else(|| parse_rational(v).ok().map(|r| rational::to_f64(&r)))
                .ok_or_else(|| Error::Parse(format!("bad real coordinate {v:?}")))
        })
        .collect()
}

// ---- serialization -------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum PointRepr {
    Pruefer {
        p: u64,
        #[serde(with = "ratstr")]
        value: BigRational,
    },
    Rational {
        #[serde(with = "ratstr")]
        value: BigRational,
    },
    Sum {
        coords: SumCoords,
    },
    Circle {
        #[serde(with = "ratstr")]
        t: BigRational,
    },
    Real {
        coords: Vec<f64>,
    },
    Product {
        real: Vec<f64>,
        discrete: Box<GroupPoint>,
    },
}

/// Coordinates keyed by decimal index strings, emitted in numeric order.
struct SumCoords(BTreeMap<usize, GroupPoint>);

impl Serialize for SumCoords {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (j, v) in &self.0 {
            m.serialize_entry(&j.to_string(), v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for SumCoords {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = BTreeMap::<String, GroupPoint>::deserialize(d)?;
        let mut coords = BTreeMap::new();
        for (j, v) in raw {
            let j: usize = j.parse().map_err(D::Error::custom)?;
            if j == 0 {
                return Err(D::Error::custom("summand indices start at 1"));
            }
            coords.insert(j, v);
        }
        Ok(SumCoords(coords))
    }
}

impl Serialize for GroupPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self.clone() {
            GroupPoint::Pruefer(a) => PointRepr::Pruefer { p: a.p, value: a.value() },
            GroupPoint::Rational(a) => PointRepr::Rational { value: a.0 },
            GroupPoint::Sum(a) => PointRepr::Sum { coords: SumCoords(a.coords) },
            GroupPoint::Circle(a) => PointRepr::Circle { t: a.0 },
            GroupPoint::Real(a) => PointRepr::Real { coords: a.0 },
            GroupPoint::Product(a) => PointRepr::Product { real: a.real.0, discrete: a.discrete },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        Ok(match PointRepr::deserialize(d)? {
            PointRepr::Pruefer { p, value } => {
                GroupPoint::Pruefer(PrueferPoint::from_rational(p, &value).map_err(D::Error::custom)?)
            }
            PointRepr::Rational { value } => GroupPoint::rational(value),
            PointRepr::Sum { coords } => GroupPoint::sum(coords.0),
            PointRepr::Circle { t } => GroupPoint::circle(t),
            PointRepr::Real { coords } => GroupPoint::real(coords).map_err(D::Error::custom)?,
            PointRepr::Product { real, discrete } => GroupPoint::Product(ProductPoint {
                real: RealPoint(real),
                discrete,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn pr(p: u64, x: BigRational) -> GroupPoint {
        GroupPoint::Pruefer(PrueferPoint::from_rational(p, &x).unwrap())
    }

    #[test]
    fn pruefer_addition() {
        let half = pr(2, rat(1, 2));
        assert!(half.add(&half).unwrap().is_zero());
        assert_eq!(half.add(&pr(2, rat(1, 4))).unwrap(), pr(2, rat(3, 4)));
        assert!(pr(2, rat(1, 2)).add(&pr(3, rat(1, 3))).is_err());
    }

    #[test]
    fn sum_cancellation() {
        let a = GroupPoint::sum([(1, pr(2, rat(1, 2)))]);
        let b = GroupPoint::sum([(1, pr(2, rat(1, 2))), (2, pr(3, rat(1, 3)))]);
        assert_eq!(a.add(&b).unwrap(), GroupPoint::sum([(2, pr(3, rat(1, 3)))]));
    }

    #[test]
    fn multiples() {
        assert_eq!(pr(2, rat(1, 4)).nmul(2), pr(2, rat(1, 2)));
        assert_eq!(GroupPoint::rational(rat(5, 2)).nmul(3), GroupPoint::rational(rat(15, 2)));
        assert_eq!(GroupPoint::circle(rat(3, 10)).nmul(5), GroupPoint::circle(rat(1, 2)));
        assert!(pr(3, rat(2, 9)).nmul(0).is_zero());
        assert_eq!(pr(3, rat(2, 9)).nmul(-1), pr(3, rat(7, 9)));
    }

    #[test]
    fn layers() {
        let g = GroupDescriptor::Pruefer { p: 2 };
        assert_eq!(g.layer_of(&pr(2, rat(3, 8))).unwrap(), 3);
        assert_eq!(g.layer_of(&g.identity()).unwrap(), 1);
        let q = GroupDescriptor::Rationals { chain: Chain::Factorial };
        assert_eq!(q.layer_of(&GroupPoint::rational(rat(5, 2))).unwrap(), 2);
        assert_eq!(q.layer_of(&GroupPoint::rational(int(0))).unwrap(), 1);
        assert_eq!(q.layer_of(&GroupPoint::rational(rat(1, 8))).unwrap(), 4);
        assert_eq!(q.layer_of(&GroupPoint::rational(rat(1, 7))).unwrap(), 7);
        assert!(GroupDescriptor::Circle.layer_of(&GroupPoint::circle(int(0))).is_err());
    }

    #[test]
    fn explicit_chain() {
        let c = Chain::Explicit { terms: vec![1u32.into(), 2u32.into(), 6u32.into()] };
        c.validate().unwrap();
        assert_eq!(c.layer_of(&rat(1, 3)).unwrap(), 3);
        assert!(c.layer_of(&rat(1, 4)).is_err());
        let bad = Chain::Explicit { terms: vec![2u32.into(), 3u32.into()] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn floors() {
        assert_eq!(even_floor(&rat(5, 2)), 2u32.into());
        assert_eq!(even_floor(&rat(-5, 2)), 2u32.into());
        assert_eq!(even_floor(&int(0)), 0u32.into());
    }

    #[test]
    fn descriptor_checks() {
        assert!(GroupDescriptor::Pruefer { p: 4 }.validate().is_err());
        let g = GroupDescriptor::Sum {
            summands: vec![GroupDescriptor::Pruefer { p: 2 }, GroupDescriptor::Pruefer { p: 3 }],
        };
        let x = g.parse_point("1:1/2; 2:2/9").unwrap();
        assert!(g.contains(&x));
        assert!(g.parse_point("2:1/2").is_err());
        let y = g.parse_point("2:1/3").unwrap();
        assert_eq!(g.add(&x, &y).unwrap(), g.parse_point("1:1/2;2:5/9").unwrap());
        assert!(g.add(&x, &GroupPoint::circle(int(0))).is_err());
    }

    #[test]
    fn json_shapes() {
        let x = GroupPoint::sum([(2, pr(3, rat(1, 3))), (1, pr(2, rat(1, 2)))]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"sum","coords":{"1":{"kind":"pruefer","p":2,"value":"1/2"},"2":{"kind":"pruefer","p":3,"value":"1/3"}}}"#
        );
        let back: GroupPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        let d = serde_json::to_string(&GroupDescriptor::Rationals { chain: Chain::Factorial }).unwrap();
        assert_eq!(d, r#"{"variant":"rationals","chain":{"kind":"factorial"}}"#);
    }
}
