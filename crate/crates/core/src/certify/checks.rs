use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupPoint};
use crate::rational::{self, fmt_rational, int};
use crate::value::Value;
use crate::weights::{subset_coeff, Construction, WeightFn};

use super::conv::conv_at;
use super::window::{fmt_point_list, TruncationSpec, Window};
use super::{combine, Certificate, Property, Verdict};

fn value_json(v: &Value) -> serde_json::Value {
    json!({ "form": v.describe(), "approx": v.to_f64() })
}

/// `u*u <= u` on every window point.
pub fn check_b(u: &WeightFn, window: &Window, trunc: &TruncationSpec) -> Result<Certificate> {
    check_b_bound(u, window, trunc, &BigRational::one())
}

/// `u*u <= bound * u` on every window point, with certified tails.
pub fn check_b_bound(
    u: &WeightFn,
    window: &Window,
    trunc: &TruncationSpec,
    bound: &BigRational,
) -> Result<Certificate> {
    let per_point: Vec<Result<(Verdict, BigRational)>> = window
        .points
        .par_iter()
        .map(|x| {
            let conv = conv_at(u, x, trunc)?;
            let ux = u.eval_exact(x)?;
            let thr = bound * &ux;
            let ratio = &conv.hi / &ux;
            let v = if conv.hi <= thr {
                Verdict::Holds
            } else if conv.lo > thr {
                Verdict::Fails {
                    witness: json!({
                        "point": x,
                        "conv_lo": fmt_rational(&conv.lo),
                        "conv_hi": fmt_rational(&conv.hi),
                        "u": fmt_rational(&ux),
                        "bound_times_u": fmt_rational(&thr),
                    }),
                }
            } else {
                Verdict::Inconclusive {
                    reason: format!(
                        "at {x}: conv lies in [{}, {}] around the threshold {}",
                        fmt_rational(&conv.lo),
                        fmt_rational(&conv.hi),
                        fmt_rational(&thr)
                    ),
                }
            };
            Ok((v, ratio))
        })
        .collect();
    let per_point = per_point.into_iter().collect::<Result<Vec<_>>>()?;

    let mut cert = Certificate::new(Property::Subconvolutive, u.construction().tag()).with_window(window);
    cert.truncation = Some(trunc.clone());
    let inconclusive: Vec<GroupPoint> = window
        .points
        .iter()
        .zip(&per_point)
        .filter(|(_, (v, _))| matches!(v, Verdict::Inconclusive { .. }))
        .map(|(x, _)| x.clone())
        .collect();
    let (worst_i, worst) = per_point
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.cmp(&b.1 .1).then(b.0.cmp(&a.0)))
        .map(|(i, (_, r))| (i, r.clone()))
        .ok_or_else(|| Error::InvalidParameter("empty window".into()))?;
    cert.put("bound", fmt_rational(bound));
    cert.put("max_conv_hi_over_u", fmt_rational(&worst));
    cert.put("max_conv_hi_over_u_approx", rational::to_f64(&worst));
    cert.put("worst_point", &window.points[worst_i]);
    cert.put("inconclusive_count", inconclusive.len());
    cert.put("inconclusive_points", fmt_point_list(&inconclusive, 20));
    cert.verdict = combine(per_point.into_iter().map(|(v, _)| v));
    Ok(cert.seal(&serde_json::to_string(u).expect("weights serialize")))
}

/// Positivity (a) and evenness (c), exactly, over a negation-closed window.
/// On the circle the point 0 is excluded (the conditions are read almost
/// everywhere); the exclusion is recorded.
pub fn check_parity_positivity(u: &WeightFn, window: &Window) -> Result<Certificate> {
    window.require_symmetric()?;
    let circle = matches!(u.descriptor(), GroupDescriptor::Circle);
    let mut cert = Certificate::new(Property::ParityPositivity, u.construction().tag()).with_window(window);
    let mut excluded = Vec::new();
    let mut verdicts = Vec::new();
    let mut pos_fail = 0usize;
    let mut even_fail = 0usize;
    for x in &window.points {
        if circle && x.is_zero() {
            excluded.push(x.to_string());
            continue;
        }
        let v = u.eval(x)?;
        if v.compare(&Value::zero()) != Some(Ordering::Greater) {
            pos_fail += 1;
            verdicts.push(Verdict::Fails {
                witness: json!({ "point": x, "property": "positivity", "value": value_json(&v) }),
            });
            continue;
        }
        let m = u.eval(&x.neg())?;
        match v.compare(&m) {
            Some(Ordering::Equal) => {}
            Some(_) => {
                even_fail += 1;
                verdicts.push(Verdict::Fails {
                    witness: json!({
                        "point": x,
                        "property": "evenness",
                        "value": value_json(&v),
                        "mirror_value": value_json(&m),
                    }),
                })
            }
            None => verdicts.push(Verdict::Inconclusive {
                reason: format!("u({x}) and u(-{x}) agree only to float precision"),
            }),
        }
    }
    if !excluded.is_empty() {
        cert.notes.push("point 0 excluded: positivity is required almost everywhere on the circle".into());
        if let Ok(v0) = u.eval(&GroupPoint::circle(BigRational::zero())) {
            cert.put("value_at_excluded_point", value_json(&v0));
        }
    }
    cert.put("excluded_points", excluded);
    cert.put("positivity_failures", pos_fail);
    cert.put("evenness_failures", even_fail);
    cert.verdict = combine(verdicts);
    Ok(cert.seal(&serde_json::to_string(u).expect("weights serialize")))
}

/// Explicit constants with `1/u(nx) <= C n^d` for all `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDecay {
    pub c: Value,
    pub d: u32,
}

/// `(C, d)` from the construction's formula, or `None` when the
/// provenance gives no such bound.
pub fn poly_decay_constants(u: &WeightFn, x: &GroupPoint) -> Result<Option<PolyDecay>> {
    let s = u.scale();
    let out = match u.construction() {
        Construction::NestedFinite { phi, .. } => {
            // the orbit of x stays in G_{L(x)}
            let m = phi.min_upto(u.descriptor().layer_of(x)?);
            PolyDecay { c: Value::exact((s * m).recip()), d: 0 }
        }
        Construction::Rationals { phi, .. } => {
            // nx stays in Q_{L(x)}, and floor|nx| <= n max(1,|x|)
            let q = match x {
                GroupPoint::Rational(q) => q.0.abs(),
                _ => return Err(Error::DescriptorMismatch(x.to_string())),
            };
            let m = phi.min_upto(u.descriptor().layer_of(x)?);
            let r = q.max(BigRational::one());
            PolyDecay { c: Value::exact(&r * &r / (s * m)), d: 2 }
        }
        Construction::DirectSum { summands, alphas, epsilon1 } => {
            // s(nx) is a subset of s(x), so a_{s(nx)} >= a_{s(x)}; each present
            // factor alpha_j u_j(n x_j) is at least alpha_j / (max(C_j,1) n^{d_j})
            let sp = x.as_sum().ok_or_else(|| Error::DescriptorMismatch(x.to_string()))?;
            let support: Vec<usize> = sp.support().collect();
            let mut c = Value::exact((s * subset_coeff(epsilon1, &support)).recip());
            let mut d = 0;
            for (j, xj) in sp.coords() {
                let pd = match poly_decay_constants(&summands[j - 1], xj)? {
                    Some(pd) => pd,
                    None => return Ok(None),
                };
                let cj = if pd.c.compare(&Value::one()) == Some(Ordering::Less) { Value::one() } else { pd.c };
                c = c.mul(&cj).scale(&alphas[j - 1].recip());
                d += pd.d;
            }
            PolyDecay { c, d }
        }
        Construction::Euclidean { d, normalized } => {
            let r = match x {
                GroupPoint::Real(r) => r,
                _ => return Err(Error::DescriptorMismatch(x.to_string())),
            };
            let mut q = BigRational::one();
            for c in &r.0 {
                let c = rational::from_f64(*c)?;
                q *= BigRational::one() + &c * &c;
            }
            let mut c = Value::exact(q / s);
            if *normalized {
                c = c.mul(&Value::exp_float(*d as f64 * std::f64::consts::TAU.ln()));
            }
            PolyDecay { c, d: 2 * *d as u32 }
        }
        Construction::Product { real, discrete } => {
            let pp = match x {
                GroupPoint::Product(pp) => pp,
                _ => return Err(Error::DescriptorMismatch(x.to_string())),
            };
            let a = poly_decay_constants(real, &GroupPoint::Real(pp.real.clone()))?;
            let b = poly_decay_constants(discrete, &pp.discrete)?;
            match (a, b) {
                (Some(a), Some(b)) => PolyDecay { c: a.c.mul(&b.c).scale(&s.recip()), d: a.d + b.d },
                _ => return Ok(None),
            }
        }
        _ => return Ok(None),
    };
    Ok(Some(out))
}

/// Property (d) along the orbit of `x`: explicit `(C, d)` from the
/// construction, verified for `n = 1..=n_max`.
pub fn check_poly_decay(u: &WeightFn, x: &GroupPoint, n_max: u32) -> Result<Certificate> {
    if n_max < 10 {
        return Err(Error::InvalidParameter("the orbit check needs N >= 10".into()));
    }
    let mut cert = Certificate::new(Property::PolyDecay, u.construction().tag());
    cert.put("x", x);
    cert.put("n_max", n_max);
    let pd = poly_decay_constants(u, x)?;
    let (c, d, rigorous) = match &pd {
        Some(pd) => (pd.c.clone(), pd.d, true),
        None => {
            // sampled stand-in: d = 0 with the observed maximum
            let mut best = Value::zero();
            for n in 1..=n_max as i64 {
                let r = u.eval(&x.nmul(n))?.recip()?;
                if r.compare(&best) != Some(Ordering::Less) {
                    best = r;
                }
            }
            (best, 0, false)
        }
    };
    cert.rigorous = rigorous;
    cert.put("c", value_json(&c));
    cert.put("d", d);
    let mut verdicts = Vec::new();
    for n in 1..=n_max as i64 {
        let lhs = u.eval(&x.nmul(n))?.recip()?;
        let rhs = c.scale(&rational::powi(&int(n), d as i64));
        match lhs.compare(&rhs) {
            Some(Ordering::Greater) => verdicts.push(Verdict::Fails {
                witness: json!({ "n": n, "inverse_value": value_json(&lhs), "bound": value_json(&rhs) }),
            }),
            None => verdicts.push(Verdict::Inconclusive { reason: format!("n = {n} undecided at float precision") }),
            _ => {}
        }
    }
    cert.verdict = combine(verdicts);
    if !rigorous && cert.verdict.is_holds() {
        cert.verdict = Verdict::Inconclusive {
            reason: "no growth formula for this construction; constants are sampled only".into(),
        };
    }
    Ok(cert.seal(&serde_json::to_string(u).expect("weights serialize")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubmultMode {
    /// `w(s+t) <= w(s) w(t)` pair by pair
    Exact,
    /// `max_t w(s+t)/w(t)` per `s` over the window
    Invariance,
}

/// Pairs larger than this are sampled (seeded) instead of enumerated.
const MAX_PAIRS: usize = 4096;

fn window_pairs(window: &Window, seed: u64) -> (Vec<(usize, usize)>, bool) {
    let n = window.points.len();
    if n * n <= MAX_PAIRS {
        return ((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(), true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ((0..MAX_PAIRS).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect(), false)
}

pub fn check_submultiplicative(w: &WeightFn, window: &Window, mode: SubmultMode, seed: u64) -> Result<Certificate> {
    let mut cert = Certificate::new(Property::Submult, w.construction().tag()).with_window(window);
    let vals: Vec<Value> = window.points.iter().map(|x| w.eval(x)).collect::<Result<_>>()?;
    match mode {
        SubmultMode::Exact => {
            let (pairs, all) = window_pairs(window, seed);
            cert.put("mode", "exact");
            cert.put("seed", seed);
            cert.put("all_pairs", all);
            cert.put("pairs_checked", pairs.len());
            let verdicts: Vec<Result<Verdict>> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let (s, t) = (&window.points[i], &window.points[j]);
                    let lhs = w.eval(&w.descriptor().add(s, t)?)?;
                    let rhs = vals[i].mul(&vals[j]);
                    Ok(match lhs.compare(&rhs) {
                        Some(Ordering::Greater) => Verdict::Fails {
                            witness: json!({
                                "s": s,
                                "t": t,
                                "w_sum": value_json(&lhs),
                                "w_s_times_w_t": value_json(&rhs),
                            }),
                        },
                        None => Verdict::Inconclusive { reason: format!("pair ({s}, {t}) undecided at float precision") },
                        _ => Verdict::Holds,
                    })
                })
                .collect();
            cert.verdict = combine(verdicts.into_iter().collect::<Result<Vec<_>>>()?);
            cert.rigorous = all;
        }
        SubmultMode::Invariance => {
            cert.put("mode", "invariance");
            let mut rows = Vec::new();
            let mut skipped = false;
            for s in &window.points {
                let mut best = f64::NEG_INFINITY;
                for (t, wt) in window.points.iter().zip(&vals) {
                    if wt.is_zero() {
                        skipped = true;
                        continue;
                    }
                    let r = w.eval(&w.descriptor().add(s, t)?)?.div(wt)?;
                    best = best.max(r.ln());
                }
                rows.push(json!({ "s": s, "max_ratio": best.exp() }));
            }
            cert.put("l_s", rows);
            cert.rigorous = false;
            cert.notes.push("finite-sample maximum over the window; no claim about the essential supremum".into());
            if skipped {
                cert.notes.push("points where w vanishes were skipped as denominators".into());
            }
            cert.verdict = Verdict::Holds;
        }
    }
    Ok(cert.seal(&serde_json::to_string(w).expect("weights serialize")))
}

/// `C_1 <= w_1/w_2 <= C_2` over a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    pub c1: Value,
    pub c2: Value,
}

pub fn weight_equivalence(w1: &WeightFn, w2: &WeightFn, window: &Window) -> Result<(Equivalence, Certificate)> {
    let mut decided = true;
    let mut lo: Option<Value> = None;
    let mut hi: Option<Value> = None;
    for x in &window.points {
        let r = w1.eval(x)?.div(&w2.eval(x)?)?;
        let less = |a: &Value, b: &Value, decided: &mut bool| match a.compare(b) {
            Some(o) => o == Ordering::Less,
            None => {
                *decided = false;
                a.ln() < b.ln()
            }
        };
        if lo.as_ref().is_none_or(|l| less(&r, l, &mut decided)) {
            lo = Some(r.clone());
        }
        if hi.as_ref().is_none_or(|h| less(h, &r, &mut decided)) {
            hi = Some(r);
        }
    }
    let (c1, c2) = match (lo, hi) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidParameter("empty window".into())),
    };
    let tag = format!("{}/{}", w1.construction().tag(), w2.construction().tag());
    let mut cert = Certificate::new(Property::Equiv, &tag).with_window(window);
    cert.put("c1", value_json(&c1));
    cert.put("c2", value_json(&c2));
    cert.rigorous = decided;
    let salt = format!("{}{}", serde_json::to_string(w1).unwrap(), serde_json::to_string(w2).unwrap());
    Ok((Equivalence { c1, c2 }, cert.seal(&salt)))
}

fn min_of<'a>(it: impl Iterator<Item = &'a (Value, &'a GroupPoint)>) -> Option<(Value, &'a GroupPoint)> {
    it.min_by(|a, b| a.0.compare(&b.0).unwrap_or_else(|| a.0.ln().total_cmp(&b.0.ln()))).cloned()
}

/// `inf w > 0`: window minimum together with the construction's global
/// lower bound.
pub fn ess_inf_check(w: &WeightFn, window: &Window) -> Result<Certificate> {
    let mut cert = Certificate::new(Property::EssInf, w.construction().tag()).with_window(window);
    let vals: Vec<(Value, &GroupPoint)> =
        window.points.iter().map(|x| Ok((w.eval(x)?, x))).collect::<Result<_>>()?;
    let (wmin, at) = min_of(vals.iter()).ok_or_else(|| Error::InvalidParameter("empty window".into()))?;
    cert.put("window_min", value_json(&wmin));
    cert.put("window_min_at", at);
    if let Some((m, at)) = min_of(vals.iter().filter(|v| !v.0.is_zero())) {
        cert.put("window_min_nonzero", value_json(&m));
        cert.put("window_min_nonzero_at", at);
    }
    match w.inf_bound() {
        Some(g) if g.compare(&Value::zero()) == Some(Ordering::Greater) => {
            cert.put("global_lower_bound", value_json(&g));
            cert.verdict = Verdict::Holds;
        }
        Some(_) => {
            cert.put("global_inf", "0/1");
            cert.verdict = Verdict::Fails {
                witness: json!({
                    "global_inf": "0/1",
                    "window_min": value_json(&wmin),
                    "window_min_at": at,
                }),
            };
        }
        None => {
            cert.rigorous = false;
            cert.verdict = Verdict::Inconclusive { reason: "no global lower bound from the construction".into() };
        }
    }
    Ok(cert.seal(&serde_json::to_string(w).expect("weights serialize")))
}

