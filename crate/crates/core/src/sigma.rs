//! The constant `C_2 = sup_m sum_n s(n) s(m-n) / s(m)` for `s(n) = 1/max(1,|n|)^2`.

use serde::{Deserialize, Serialize};

use crate::interval::{self, FloatInterval};

/// `s(n) = 1 / max(1, |n|)^2`
pub fn sigma(n: i64) -> f64 {
    let b = n.unsigned_abs().max(1) as f64;
    1.0 / (b * b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaConstant {
    /// Enclosure of the supremum over all `m`.
    pub c2: FloatInterval,
    /// Enclosure of the ratio at `m = 0`, i.e. `sum_n s(n)^2`.
    pub at_zero: FloatInterval,
    /// Largest enclosed ratio among the scanned `m`.
    pub scanned_max: FloatInterval,
    pub scanned_up_to: u64,
    /// Analytic bound covering every `m` beyond the scan.
    pub beyond_scan: f64,
}

/// Enclosure of `sum_n s(n) s(m-n) / s(m)` (`m >= 0`), summing `|n| <= cut`
/// with `cut >= 2m`.
pub fn ratio_at(m: u64, cut: u64) -> FloatInterval {
    assert!(cut >= 2 * m && cut >= 1, "cut must dominate 2m");
    let m = m as i64;
    let cut = cut as i64;
    // nonnegative terms, summed from small to large for accuracy
    let mut terms: Vec<f64> = (-cut..=cut).map(|n| sigma(n) * sigma(m - n)).collect();
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sum: f64 = terms.iter().sum();
    // each term carries 3 roundings; recursive summation adds (len-1)
    let delta = (terms.len() as f64 + 4.0) * f64::EPSILON;
    let sum = FloatInterval::new((sum * (1.0 - delta)).next_down(), (sum * (1.0 + delta)).next_up());
    // |n| > cut >= 2m: s(m-n) <= 4/n^2, so the two tails add at most 8/(3 cut^3)
    let c = cut as f64;
    let tail = (8.0 / (3.0 * c * c * c)).next_up();
    let total = FloatInterval::new(sum.lo, (sum.hi + tail).next_up());
    let mbar = m.max(1) as f64;
    total.mul(FloatInterval::point(mbar * mbar))
}

/// Certified enclosure of `C_2`: exact scan of `0 <= m <= scan`, plus the
/// bound `2 [ (m/(m-A))^2 S + 8/A ]` for `m > scan`, with `S = sum_n s(n)`.
pub fn sigma_subconvolutive_constant(scan: u64) -> SigmaConstant {
    assert!(scan >= 100, "scan range must be at least 100");
    let cut = 4 * scan;
    let ratios: Vec<FloatInterval> = {
        use rayon::prelude::*;
        (0..=scan).into_par_iter().map(|m| ratio_at(m, cut)).collect()
    };
    let at_zero = ratios[0];
    let lo = ratios.iter().map(|r| r.lo).fold(f64::NEG_INFINITY, f64::max);
    let hi = ratios.iter().map(|r| r.hi).fold(f64::NEG_INFINITY, f64::max);
    let scanned_max = FloatInterval::new(lo, hi);

    // S = 1 + pi^2/3, enclosed from above
    let three = FloatInterval::point(3.0);
    let s = FloatInterval::point(1.0).add(interval::pi().powi(2).div_pos(three));
    let a = (scan / 10).max(1) as f64;
    let mm = scan as f64 + 1.0;
    let q = FloatInterval::point(mm).div_pos(FloatInterval::point(mm - a)).powi(2);
    let beyond = q.mul(s).add(FloatInterval::point(8.0).div_pos(FloatInterval::point(a)));
    let beyond_scan = beyond.mul(FloatInterval::point(2.0)).hi;

    SigmaConstant {
        c2: FloatInterval::new(lo, hi.max(beyond_scan)),
        at_zero,
        scanned_max,
        scanned_up_to: scan,
        beyond_scan,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_grows_toward_twice_the_mass() {
        let a = ratio_at(1, 400).mid();
        let b = ratio_at(100, 400).mid();
        assert!(a < b);
        // m^2 sum s(n)s(m-n) -> 2 sum s(n) = 2 + 2 pi^2/3
        let limit = 2.0 + 2.0 * std::f64::consts::PI.powi(2) / 3.0;
        assert!(b < limit);
    }
}
