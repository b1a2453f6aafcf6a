use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Chain, GroupDescriptor, GroupPoint, PrueferPoint};
use crate::rational::{self, parse_rational};

/// A finite set of points a check runs over.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub spec: String,
    pub points: Vec<GroupPoint>,
}

fn bad(spec: &str, why: &str) -> Error {
    Error::Parse(format!("window {spec:?}: {why}"))
}

fn num<T: std::str::FromStr>(spec: &str, s: Option<&str>) -> Result<T> {
    s.and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad(spec, "expected a number"))
}

impl Window {
    pub fn from_points(spec: impl Into<String>, points: Vec<GroupPoint>) -> Self {
        Window { spec: spec.into(), points }
    }

    /// Builds a window from its textual spec:
    ///
    /// * `G_N`: all of `G_N` in a Prüfer group,
    /// * `Q_N:B`: `Q_N` intersected with `[-B, B]`,
    /// * `sample:K:L`: `K` seeded random points of a direct sum, coordinates
    ///   up to layer `L`, closed under negation,
    /// * `circle:K`: `k/K` on the circle,
    /// * `grid:A:B:K`: `K+1` equally spaced reals from `A` to `B`,
    /// * `list:x y ...`: explicit points in the group's notation.
    pub fn parse(spec: &str, descriptor: &GroupDescriptor, seed: u64) -> Result<Window> {
        let spec = spec.trim();
        let points = if let Some(rest) = spec.strip_prefix("list:") {
            rest.split_whitespace().map(|p| descriptor.parse_point(p)).collect::<Result<Vec<_>>>()?
        } else if let Some(rest) = spec.strip_prefix("G_") {
            let n: u32 = num(spec, Some(rest))?;
            match descriptor {
                GroupDescriptor::Pruefer { p } => pruefer_layer_points(*p, n),
                _ => return Err(bad(spec, "G_N windows need a Prüfer group")),
            }
        } else if let Some(rest) = spec.strip_prefix("Q_") {
            let mut it = rest.split(':');
            let n: u32 = num(spec, it.next())?;
            let b: u64 = match it.next() {
                Some(v) => num(spec, Some(v))?,
                None => n as u64,
            };
            match descriptor {
                GroupDescriptor::Rationals { chain } => rational_points(chain, n, b)?,
                _ => return Err(bad(spec, "Q_N windows need the rationals")),
            }
        } else if let Some(rest) = spec.strip_prefix("sample:") {
            let mut it = rest.split(':');
            let k: usize = num(spec, it.next())?;
            let l: u32 = num(spec, it.next())?;
            sample_points(descriptor, k, l, seed)?
        } else if let Some(rest) = spec.strip_prefix("circle:") {
            let k: i64 = num(spec, Some(rest))?;
            if k < 1 {
                return Err(bad(spec, "need at least one point"));
            }
            (0..k).map(|i| GroupPoint::circle(rational::rat(i, k))).collect()
        } else if let Some(rest) = spec.strip_prefix("grid:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad(spec, "expected grid:A:B:K"));
            }
            let a = parse_rational(parts[0])?;
            let b = parse_rational(parts[1])?;
            let k: i64 = num(spec, Some(parts[2]))?;
            if k < 1 || b < a {
                return Err(bad(spec, "need A <= B and K >= 1"));
            }
            if !matches!(descriptor, GroupDescriptor::Real { d: 1 }) {
                return Err(bad(spec, "grid windows need the real line"));
            }
            let h = (&b - &a) / rational::int(k);
            (0..=k)
                .map(|i| GroupPoint::real(vec![rational::to_f64(&(&a + &h * rational::int(i)))]))
                .collect::<Result<Vec<_>>>()?
        } else {
            return Err(bad(spec, "unknown window kind"));
        };
        for x in &points {
            if !descriptor.contains(x) {
                return Err(Error::DescriptorMismatch(format!("window point {x} is not in {}", descriptor.label())));
            }
        }
        Ok(Window { spec: spec.to_string(), points })
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetric().is_none()
    }

    fn first_asymmetric(&self) -> Option<&GroupPoint> {
        let set: BTreeSet<&GroupPoint> = self.points.iter().collect();
        self.points.iter().find(|x| !set.contains(&x.neg()))
    }

    pub fn require_symmetric(&self) -> Result<()> {
        match self.first_asymmetric() {
            Some(x) => Err(Error::WindowNotSymmetric(x.to_string())),
            None => Ok(()),
        }
    }
}

fn pruefer_layer_points(p: u64, n: u32) -> Vec<GroupPoint> {
    let size = p.pow(n);
    (0..size)
        .map(|k| GroupPoint::Pruefer(PrueferPoint::new(p, BigInt::from(k), n)))
        .collect()
}

fn rational_points(chain: &Chain, n: u32, b: u64) -> Result<Vec<GroupPoint>> {
    let t = chain
        .term(n)
        .ok_or_else(|| Error::InvalidParameter(format!("chain has no term t_{n}")))?;
    let t = BigInt::from(t);
    let lim = &t * BigInt::from(b);
    let lim = lim.to_i64().ok_or_else(|| Error::InvalidParameter("window too large".into()))?;
    Ok((-lim..=lim)
        .map(|m| GroupPoint::rational(BigRational::new(BigInt::from(m), t.clone())))
        .collect())
}

fn random_coord(d: &GroupDescriptor, layers: u32, rng: &mut ChaCha8Rng) -> Result<GroupPoint> {
    if rng.gen_ratio(1, 3) {
        return Ok(d.identity());
    }
    let l = rng.gen_range(1..=layers.max(1));
    match d {
        GroupDescriptor::Pruefer { p } => {
            let size = p.checked_pow(l).ok_or_else(|| Error::InvalidParameter("layer too deep".into()))?;
            Ok(GroupPoint::Pruefer(PrueferPoint::new(*p, BigInt::from(rng.gen_range(0..size)), l)))
        }
        GroupDescriptor::Rationals { chain } => {
            let t = chain
                .term(l)
                .and_then(|t| t.to_i64())
                .ok_or_else(|| Error::InvalidParameter("chain term too large for sampling".into()))?;
            let m = rng.gen_range(-3 * t..=3 * t);
            Ok(GroupPoint::rational(rational::rat(m, t)))
        }
        other => Err(Error::InvalidParameter(format!("cannot sample coordinates of {}", other.label()))),
    }
}

fn sample_points(d: &GroupDescriptor, k: usize, layers: u32, seed: u64) -> Result<Vec<GroupPoint>> {
    let summands = match d {
        GroupDescriptor::Sum { summands } => summands,
        _ => return Err(Error::InvalidParameter("sample windows need a direct sum".into())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    set.insert(d.identity());
    let mut attempts = 0;
    while set.len() < k && attempts < 200_000 {
        attempts += 1;
        let coords = summands
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((i + 1, random_coord(s, layers, &mut rng)?)))
            .collect::<Result<Vec<_>>>()?;
        let x = GroupPoint::sum(coords);
        let nx = x.neg();
        if set.contains(&x) {
            continue;
        }
        if x == nx {
            set.insert(x);
        } else if set.len() + 2 <= k {
            set.insert(x);
            set.insert(nx);
        }
    }
    Ok(set.into_iter().collect())
}

/// How far the convolution engine sums explicitly before switching to
/// closed-form tail bounds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// layer cutoff `N`; `None` means "use the closed form in full"
    pub layers: Option<u32>,
    /// range cutoff `B` for the rationals
    pub range: Option<u64>,
    /// per-summand layer cutoffs for direct sums
    pub per_summand: Vec<u32>,
}

impl TruncationSpec {
    pub fn layers(n: u32) -> Self {
        TruncationSpec { layers: Some(n), ..Default::default() }
    }

    pub fn rationals(n: u32, b: u64) -> Self {
        TruncationSpec { layers: Some(n), range: Some(b), ..Default::default() }
    }

    pub fn per_summand(cuts: Vec<u32>) -> Self {
        TruncationSpec { per_summand: cuts, ..Default::default() }
    }

    /// Parses `N=8`, `N=5,B=40`, `S=6:6:6` (any combination, or `full`).
    pub fn parse(s: &str) -> Result<Self> {
        let mut t = TruncationSpec::default();
        let s = s.trim();
        if s == "full" || s.is_empty() {
            return Ok(t);
        }
        for part in s.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("truncation {s:?}: expected key=value")))?;
            let bad = || Error::Parse(format!("truncation {s:?}: bad value {v:?}"));
            match k.trim() {
                "N" => t.layers = Some(v.trim().parse().map_err(|_| bad())?),
                "B" => t.range = Some(v.trim().parse().map_err(|_| bad())?),
                "S" => {
                    t.per_summand = v.split(':').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
                }
                other => return Err(Error::Parse(format!("truncation {s:?}: unknown key {other:?}"))),
            }
        }
        Ok(t)
    }

    /// Cutoff for summand `j` (1-based): its own entry, else `N`.
    pub fn for_summand(&self, j: usize) -> TruncationSpec {
        TruncationSpec {
            layers: self.per_summand.get(j - 1).copied().or(self.layers),
            range: self.range,
            per_summand: Vec::new(),
        }
    }
}

impl fmt::Display for TruncationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(n) = self.layers {
            parts.push(format!("N={n}"));
        }
        if let Some(b) = self.range {
            parts.push(format!("B={b}"));
        }
        if !self.per_summand.is_empty() {
            let s: Vec<String> = self.per_summand.iter().map(|x| x.to_string()).collect();
            parts.push(format!("S={}", s.join(":")));
        }
        if parts.is_empty() {
            f.write_str("full")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

pub(crate) fn fmt_point_list(points: &[GroupPoint], limit: usize) -> Vec<String> {
    points.iter().take(limit).map(|p| p.to_string()).collect()
}
