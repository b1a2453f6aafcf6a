//! Quadrature checks for the formula weights on the line and the circle.
//!
//! The circle convolution of `t^{-1/2}` is split at the singularities and
//! both pieces are integrated in closed form; quadrature is used to
//! reproduce the inner segment and the Cauchy convolution on the line.

use std::f64::consts::{E, FRAC_PI_2, PI};

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::certify::{Certificate, Property, Verdict};
use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupPoint};
use crate::interval::FloatInterval;
use crate::rational::{self, rat};
use crate::value::Value;
use crate::weights::{two_pi_upper, Builtin, Construction, WeightFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Singular {
    /// power-law singularities are integrated in closed form
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// panel width of the composite rules
    pub h: f64,
    /// domain cutoff `T`
    pub cutoff: f64,
    /// evaluation points per unit length for the ratio grids
    pub grid: u32,
    pub singular: Singular,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { h: 1.0 / 256.0, cutoff: 10.0, grid: 10, singular: Singular::ClosedForm, tolerance: 1e-6 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h > 0.0 && self.h.is_finite() && self.cutoff > 0.0 && self.tolerance > 0.0 && self.grid > 0;
        if !ok {
            return Err(Error::InvalidParameter("quadrature spec needs h, T, tolerance and grid positive".into()));
        }
        Ok(())
    }
}

/// Double-exponential quadrature on `[a, b]`; `f` receives the node and
/// its distances to both ends (exact near the endpoints). Returns the
/// value at step `2^-level` and the change from the previous level.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, level: u32) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let sum_at = |h: f64| {
        let mut s = 0.0;
        let mut k = 0i64;
        loop {
            let u = k as f64 * h;
            let v = FRAC_PI_2 * u.sinh();
            let w = FRAC_PI_2 * u.cosh() / (v.cosh() * v.cosh());
            // distances to the ends without cancellation
            let dlo = half * 2.0 / (1.0 + (-2.0 * v).exp());
            let dhi = half * 2.0 / (1.0 + (2.0 * v).exp());
            let mut term = 0.0;
            if dhi > 0.0 {
                term += w * f(a + dlo, dlo, dhi);
            }
            if k > 0 && dhi > 0.0 {
                // mirror node
                term += w * f(a + dhi, dhi, dlo);
            }
            s += term;
            if k > 0 && (dhi == 0.0 || (term.abs() < 1e-18 * s.abs() && u > 1.0)) {
                break;
            }
            k += 1;
        }
        s * h * half
    };
    let fine = sum_at(0.5f64.powi(level as i32));
    let coarse = sum_at(0.5f64.powi(level as i32 - 1));
    (fine, (fine - coarse).abs())
}

/// `int_0^t s^{-1/2} (t-s)^{-1/2} ds`, which is `pi` for every `t > 0`.
pub fn beta_segment(t: f64) -> (f64, f64) {
    tanh_sinh(|_, da, db| 1.0 / (da * db).sqrt(), 0.0, t, 7)
}

/// Wrapped part `int_t^1 s^{-1/2} (1+t-s)^{-1/2} ds`, in closed form.
pub fn wrap_segment(t: f64) -> f64 {
    let c = 1.0 + t;
    2.0 * ((1.0 / c).sqrt().asin() - (t / c).sqrt().asin())
}

/// Same integral by quadrature (cross-check of the closed form).
pub fn wrap_segment_quadrature(t: f64) -> (f64, f64) {
    tanh_sinh(|s, _, db| 1.0 / (s * (t + db)).sqrt(), t, 1.0, 7)
}

fn log_w(b: Builtin, t: f64) -> Result<f64> {
    let a = t.abs();
    Ok(match b {
        Builtin::Poly2 => (t * t).ln_1p(),
        Builtin::ExpAbs => a,
        Builtin::Poly2Exp => (t * t).ln_1p() + a,
        Builtin::Poly2ExpLog => (t * t).ln_1p() + a / (E + a).ln(),
        Builtin::Poly2Char => (t * t).ln_1p() + t,
        Builtin::One => 0.0,
        Builtin::CircleQuarter => return Err(Error::DescriptorMismatch("circle weight on the line".into())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeurlingClass {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeurlingResult {
    /// `int_{-T}^{T} log+ w(t) / (1+t^2) dt`
    pub integral: FloatInterval,
    pub class: BeurlingClass,
    pub certificate: Certificate,
}

fn simpson(f: &(impl Fn(f64) -> f64 + Sync), a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .into_par_iter()
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Truncated Beurling integral with a tail classification from the formula.
pub fn beurling_integral(w: &WeightFn, spec: &QuadratureSpec) -> Result<BeurlingResult> {
    spec.validate()?;
    if !matches!(w.descriptor(), GroupDescriptor::Real { d: 1 }) {
        return Err(Error::DescriptorMismatch("the Beurling integral is defined on the line".into()));
    }
    let ls = rational::ln_abs(w.scale());
    let f = |t: f64| -> f64 {
        let l = match w.builtin() {
            Some(b) => log_w(b, t).expect("line builtin") + ls,
            None => GroupPoint::real(vec![t]).and_then(|x| w.eval(&x)).map(|v| v.ln()).unwrap_or(f64::NAN),
        };
        l.max(0.0) / (1.0 + t * t)
    };
    let t = spec.cutoff;
    let n = (2.0 * ((t / spec.h) / 2.0).ceil()) as usize;
    let (mut fine, mut coarse) = (0.0, 0.0);
    // the integrands have a kink at 0
    for (a, b) in [(-t, 0.0), (0.0, t)] {
        fine += simpson(&f, a, b, n);
        coarse += simpson(&f, a, b, n / 2);
    }
    if !fine.is_finite() {
        return Err(Error::NotCertifiable("integrand not evaluable".into()));
    }
    let err = (fine - coarse).abs() / 15.0 + 1e-14 * fine.abs();
    let integral = FloatInterval::with_error(fine, err);

    let one = BigRational::one();
    let class = match w.builtin() {
        _ if w.scale() < &one => BeurlingClass::Inconclusive,
        Some(Builtin::Poly2 | Builtin::One) => BeurlingClass::Finite,
        Some(Builtin::ExpAbs | Builtin::Poly2Exp | Builtin::Poly2ExpLog | Builtin::Poly2Char) => {
            BeurlingClass::Infinite
        }
        _ => match w.sup_bound() {
            // bounded weights have a bounded integrand numerator
            Some(b) if b.compare(&Value::one()) != Some(std::cmp::Ordering::Greater) => BeurlingClass::Finite,
            _ => BeurlingClass::Inconclusive,
        },
    };
    let comparison = match w.builtin() {
        Some(Builtin::Poly2) => "log+ w(t) <= log 2 + 2 log|t| for |t| >= 1; int log t / t^2 converges",
        Some(Builtin::One) => "integrand vanishes",
        Some(Builtin::ExpAbs | Builtin::Poly2Exp) => "log+ w(t) >= |t|; int t/(1+t^2) diverges",
        Some(Builtin::Poly2Char) => "log+ w(t) >= t for t > 0; int t/(1+t^2) diverges",
        Some(Builtin::Poly2ExpLog) => "log+ w(t) >= t/log(e+t); int 1/(t log t) diverges",
        _ => "bounded weight",
    };
    let mut cert = Certificate::new(Property::Beurling, w.construction().tag());
    cert.put("cutoff", t);
    cert.put("h", spec.h);
    cert.put("integral", integral);
    cert.put("classification", class);
    cert.put("tail_comparison", comparison);
    cert.rigorous = false;
    cert.notes.push("integral value from Simpson with a Richardson error estimate".into());
    cert.verdict = match class {
        BeurlingClass::Finite => Verdict::Holds,
        BeurlingClass::Infinite => Verdict::Fails { witness: json!({ "tail_comparison": comparison }) },
        BeurlingClass::Inconclusive => Verdict::Inconclusive { reason: "no tail bound for this weight".into() },
    };
    let salt = serde_json::to_string(w).expect("weights serialize");
    Ok(BeurlingResult { integral, class, certificate: cert.seal(&salt) })
}

/// `c t^e` for circle weights built from `t^{1/4}`.
fn circle_power(u: &WeightFn) -> Option<(BigRational, f64)> {
    let s = rational::to_f64(u.scale());
    match u.construction() {
        Construction::Builtin { name: Builtin::CircleQuarter } => Some((rat(1, 4), s)),
        Construction::Algebra { base, .. } => {
            let e = crate::weights::exponent_of(u)?;
            let (eb, cb) = circle_power(base)?;
            Some((eb * &e, cb.powf(rational::to_f64(&e)) * s))
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioResult {
    /// enclosure of the supremum of `(u*u)/u`
    pub sup: FloatInterval,
    /// where the lower end was attained
    pub argmax: f64,
    pub certificate: Certificate,
}

/// `(u*u)(t)/u(t)` for `u = c t^{-1/2}`: `c sqrt(t) (pi + W(t))`.
pub fn circle_ratio_at(c: f64, t: f64) -> f64 {
    c * t.sqrt() * (PI + wrap_segment(t))
}

/// Branch and bound over `(0, 1)`: on `[a, b]` the ratio lies between
/// `sqrt(a)(pi + W(b))` and `sqrt(b)(pi + W(a))` since `W` decreases.
pub fn circle_conv_ratio(u: &WeightFn, spec: &QuadratureSpec) -> Result<RatioResult> {
    spec.validate()?;
    let c = match circle_power(u) {
        Some((e, c)) if e == rat(-1, 2) => c,
        _ => return Err(Error::InvalidParameter("expects a circle weight of the form c t^(-1/2)".into())),
    };
    let slack = 1.0 + 1e-13;
    let upper = |a: f64, b: f64| c * b.sqrt() * (PI + wrap_segment(a)) * slack;
    let n0 = 64usize;
    let mut cells: Vec<(f64, f64)> = (0..n0).map(|i| (i as f64 / n0 as f64, (i + 1) as f64 / n0 as f64)).collect();
    let mut best = (0.0f64, 0.0f64);
    let mut hi;
    let mut rounds = 0;
    loop {
        for &(a, b) in &cells {
            for t in [a, b] {
                if t > 0.0 {
                    let r = circle_ratio_at(c, t) / slack;
                    if r > best.0 {
                        best = (r, t);
                    }
                }
            }
        }
        hi = cells.iter().map(|&(a, b)| upper(a, b)).fold(best.0, f64::max);
        if hi - best.0 <= spec.tolerance {
            break;
        }
        rounds += 1;
        if rounds > 60 {
            return Err(Error::Tolerance(format!("sup not resolved to {} (gap {})", spec.tolerance, hi - best.0)));
        }
        cells = cells
            .into_iter()
            .filter(|&(a, b)| upper(a, b) > best.0 + spec.tolerance / 2.0)
            .flat_map(|(a, b)| {
                let m = 0.5 * (a + b);
                [(a, m), (m, b)]
            })
            .collect();
    }
    let sup = FloatInterval::new(best.0, hi);
    let mut cert = Certificate::new(Property::ConvRatio, u.construction().tag());
    cert.put("sup", sup);
    cert.put("argmax", best.1);
    cert.put("m", hi);
    cert.put("tolerance", spec.tolerance);
    cert.notes.push("u/M satisfies u*u <= u, so an equivalent weight gives an algebra".into());
    cert.verdict = Verdict::Holds;
    let salt = serde_json::to_string(u).expect("weights serialize");
    Ok(RatioResult { sup, argmax: best.1, certificate: cert.seal(&salt) })
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let m = a + (i as f64 + 0.5) * h;
        for (x, w) in GL5 {
            s += w * f(m + 0.5 * h * x);
        }
    }
    0.5 * h * s
}

/// `int 1/((1+s^2)(1+(t-s)^2)) ds` through `s = tan th`, with the error
/// estimate `|Q_h - Q_{h/2}|`.
pub fn cauchy_conv(t: f64, h: f64) -> (f64, f64) {
    let g = |th: f64| {
        let d = t - th.tan();
        1.0 / (1.0 + d * d)
    };
    let n = (PI / h).ceil() as usize;
    let coarse = gauss_panels(g, -FRAC_PI_2, FRAC_PI_2, n);
    let fine = gauss_panels(g, -FRAC_PI_2, FRAC_PI_2, 2 * n);
    (fine, (fine - coarse).abs().max(64.0 * f64::EPSILON * fine))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineRatio {
    pub sup: FloatInterval,
    pub at_zero: FloatInterval,
    /// `(t, ratio, error)` on the grid
    pub grid: Vec<(f64, f64, f64)>,
    pub certificate: Certificate,
}

/// `(u*u)/u` for `u = c/(1+t^2)` over `[-T, T]`; beyond `T` the ratio is
/// covered by the construction's bound `2 pi c`.
pub fn line_conv_ratio(u: &WeightFn, spec: &QuadratureSpec) -> Result<LineRatio> {
    spec.validate()?;
    let (d, normalized) = match u.construction() {
        Construction::Euclidean { d, normalized } => (*d, *normalized),
        _ => return Err(Error::InvalidParameter("expects a Euclidean weight".into())),
    };
    if d != 1 {
        return Err(Error::InvalidParameter("the ratio factorizes; pass d = 1".into()));
    }
    let mut c = rational::to_f64(u.scale());
    if normalized {
        c /= 2.0 * PI;
    }
    let t_max = spec.cutoff;
    let k = (t_max * spec.grid as f64).round() as i64;
    let grid: Vec<(f64, f64, f64)> = (-k..=k)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / spec.grid as f64;
            let (v, e) = cauchy_conv(t, spec.h);
            let m = c * (1.0 + t * t);
            (t, v * m, e * m)
        })
        .collect();
    let worst = grid.iter().map(|g| g.2).fold(0.0, f64::max);
    if worst > spec.tolerance {
        return Err(Error::Tolerance(format!("quadrature error {worst:e} above {}", spec.tolerance)));
    }
    let lo = grid.iter().map(|g| g.1 - g.2).fold(f64::NEG_INFINITY, f64::max);
    let bound = rational::to_f64(&two_pi_upper()).next_up() * c;
    let sup = FloatInterval::new(lo.next_down(), bound.max(lo).next_up());
    let z = grid.iter().find(|g| g.0 == 0.0).expect("grid contains 0");
    let at_zero = FloatInterval::with_error(z.1, z.2);
    let mut cert = Certificate::new(Property::ConvRatio, u.construction().tag());
    cert.put("sup", sup);
    cert.put("at_zero", at_zero);
    cert.put("cutoff", t_max);
    cert.put("max_error", worst);
    cert.rigorous = false;
    cert.notes.push("upper end from the construction's bound; lower end from the grid".into());
    cert.verdict = Verdict::Holds;
    let salt = serde_json::to_string(u).expect("weights serialize");
    Ok(LineRatio { sup, at_zero, grid, certificate: cert.seal(&salt) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{algebra_inverse, builtin_weight, euclidean_weight};

    #[test]
    fn beta_segment_is_pi() {
        for i in 1..20 {
            let (v, _) = beta_segment(i as f64 / 20.0);
            assert!((v - PI).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn wrap_closed_form_matches_quadrature() {
        for t in [0.01, 0.2, 0.5, 0.9] {
            let (q, _) = wrap_segment_quadrature(t);
            assert!((q - wrap_segment(t)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn circle_ratio_is_finite() {
        let u = algebra_inverse(builtin_weight(Builtin::CircleQuarter), rational::int(2)).unwrap();
        let r = circle_conv_ratio(&u, &QuadratureSpec::default()).unwrap();
        assert!(r.sup.width() <= 1e-6 && r.sup.hi.is_finite());
        for i in 1..1000 {
            assert!(circle_ratio_at(1.0, i as f64 / 1000.0) <= r.sup.hi);
        }
    }

    #[test]
    fn cauchy_oracle() {
        for t in [0.0, 0.5, 3.0, 10.0] {
            let (v, _) = cauchy_conv(t, 1.0 / 256.0);
            assert!((v - 2.0 * PI / (4.0 + t * t)).abs() < 1e-12);
        }
        let r = line_conv_ratio(&euclidean_weight(1).unwrap(), &QuadratureSpec::default()).unwrap();
        assert!(r.at_zero.contains(FRAC_PI_2));
        assert!(r.sup.contains(2.0 * PI));
    }
}
