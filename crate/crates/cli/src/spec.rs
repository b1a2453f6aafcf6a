//! Parsing of the textual group, phi and weight arguments.

use std::fs;
use std::path::Path;

use lpw_core::group::{Chain, GroupDescriptor};
use lpw_core::rational::parse_rational;
use lpw_core::series::PhiSequence;
use lpw_core::weights::{
    algebra_weight, builtin_weight, default_alphas, to_u32, default_rationals_phi, direct_sum_weight, euclidean_weight,
    nested_finite_weight, nested_finite_weight_unchecked, pruefer_weight, rationals_weight, scale_for_b, Builtin,
    SubsetCoeffs, WeightFn,
};
use lpw_core::{Error, Result};

/// `factorial` or `explicit:2,6,30`
pub fn parse_chain(s: &str) -> Result<Chain> {
    if s == "factorial" {
        return Ok(Chain::Factorial);
    }
    let rest = s
        .strip_prefix("explicit:")
        .ok_or_else(|| Error::Parse(format!("unknown chain {s:?} (factorial | explicit:t1,t2,...)")))?;
    let terms = rest
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad chain term {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let c = Chain::Explicit { terms };
    c.validate()?;
    Ok(c)
}

/// `geometric:R`, `factorial-geometric:B` or `explicit:h1,h2,...;R`
pub fn parse_phi(s: &str) -> Result<PhiSequence> {
    let (kind, arg) = s.split_once(':').ok_or_else(|| Error::Parse(format!("bad phi {s:?}")))?;
    let phi = match kind {
        "geometric" => PhiSequence::geometric(parse_rational(arg)?),
        "factorial-geometric" => PhiSequence::factorial_geometric(parse_rational(arg)?),
        "explicit" => {
            let (head, ratio) = arg.split_once(';').ok_or_else(|| Error::Parse("explicit phi needs ';R'".into()))?;
            let head = head.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
            PhiSequence::explicit(head, parse_rational(ratio)?)
        }
        _ => return Err(Error::Parse(format!("unknown phi kind {kind:?}"))),
    };
    phi.validate()?;
    Ok(phi)
}

fn parse_prime(s: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::Parse(format!("bad prime {s:?}")))
}

/// Options shared by the constructions.
pub struct BuildOptions {
    pub chain: String,
    pub phi: Option<String>,
    pub summands: Option<String>,
    pub epsilon1: Option<String>,
    pub allow_nonmonotone: bool,
    pub raw: bool,
    pub algebra: Option<String>,
}

/// Divides `u` by its proven bound so that `u*u <= u`.
fn certified(u: WeightFn) -> Result<WeightFn> {
    match u.proven_b_bound() {
        Some(b) => scale_for_b(&u, &b),
        None => Ok(u),
    }
}

fn pruefer_from(p: u64, o: &BuildOptions) -> Result<WeightFn> {
    match &o.phi {
        None => pruefer_weight(p),
        Some(phi) => {
            let d = GroupDescriptor::Pruefer { p };
            let phi = parse_phi(phi)?;
            if o.allow_nonmonotone {
                nested_finite_weight_unchecked(&d, phi)
            } else {
                nested_finite_weight(&d, phi)
            }
        }
    }
}

/// `pruefer:P`, `rationals`, `sum`, `euclidean:D` or `builtin:NAME`.
pub fn build(group: &str, o: &BuildOptions) -> Result<WeightFn> {
    let (kind, arg) = group.split_once(':').unwrap_or((group, ""));
    let u = match kind {
        "pruefer" => pruefer_from(parse_prime(arg)?, o)?,
        "rationals" => {
            let phi = o.phi.as_deref().map(parse_phi).transpose()?.unwrap_or_else(default_rationals_phi);
            rationals_weight(parse_chain(&o.chain)?, phi)?
        }
        "sum" => {
            let list = o.summands.as_deref().ok_or_else(|| Error::InvalidParameter("sum needs --summands".into()))?;
            let summands = list
                .split(',')
                .map(|s| {
                    let p = s.trim().strip_prefix("pruefer:").ok_or_else(|| {
                        Error::InvalidParameter(format!("summand {s:?}: only pruefer:P summands are supported"))
                    })?;
                    certified(pruefer_weight(parse_prime(p)?)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let eps = o.epsilon1.as_deref().map(parse_rational).transpose()?;
            let coeffs = SubsetCoeffs::new(eps.unwrap_or_else(|| lpw_core::rational::rat(1, 60)))?;
            let alphas = default_alphas(&summands)?;
            direct_sum_weight(summands, alphas, coeffs)?
        }
        "euclidean" => {
            let d = to_u32(&parse_rational(arg)?).ok_or_else(|| Error::InvalidParameter("bad dimension".into()))?;
            euclidean_weight(d as usize)?
        }
        "builtin" => builtin_weight(Builtin::parse(arg)?),
        _ => return Err(Error::InvalidParameter(format!("unknown group {group:?}"))),
    };
    let u = if o.raw { u } else { certified(u)? };
    match &o.algebra {
        Some(p) => algebra_weight(u, parse_rational(p)?),
        None => Ok(u),
    }
}

/// A weight file or `builtin:NAME`.
pub fn load_weight(arg: &str) -> Result<WeightFn> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return Ok(builtin_weight(Builtin::parse(name)?));
    }
    let text = fs::read_to_string(Path::new(arg)).map_err(|e| Error::InvalidParameter(format!("{arg}: {e}")))?;
    WeightFn::from_json(&text)
}

/// Default window and truncation for a weight's group.
pub fn defaults(u: &WeightFn) -> (String, String) {
    let (w, t) = match u.descriptor() {
        GroupDescriptor::Pruefer { .. } => ("G_4", "N=8"),
        GroupDescriptor::Rationals { .. } => ("Q_3:3", "N=5,B=40"),
        GroupDescriptor::Sum { summands } => {
            let cuts = vec!["6"; summands.len()].join(":");
            return ("sample:200:6".into(), format!("S={cuts}"));
        }
        GroupDescriptor::Circle => ("circle:64", "full"),
        _ => ("grid:-5:5:100", "full"),
    };
    (w.into(), t.into())
}
