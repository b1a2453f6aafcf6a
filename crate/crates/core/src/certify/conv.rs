//! `(u*u)(x) = sum_y u(y) u(x-y)` on the discrete constructions, as exact
//! rational enclosures: an explicit partial sum plus closed-form tails.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{Chain, GroupDescriptor, GroupPoint};
use crate::interval::Interval;
use crate::rational::{self, int};
use crate::series::{LayerSizes, PhiSequence};
use crate::weights::{chain_sizes, sigma_exact, subset_coeff, Construction, WeightFn};

use super::window::TruncationSpec;

/// Enclosure of `(u*u)(x)`. `lo` is the partial sum over the truncation
/// set, `hi` adds the closed-form tail bound.
pub fn conv_at(u: &WeightFn, x: &GroupPoint, trunc: &TruncationSpec) -> Result<Interval> {
    if !u.descriptor().contains(x) {
        return Err(Error::DescriptorMismatch(format!("{x} is not in {}", u.descriptor().label())));
    }
    let raw = match (u.construction(), u.descriptor()) {
        (Construction::NestedFinite { phi, .. }, GroupDescriptor::Pruefer { p }) => {
            nested_conv(phi, *p, u.descriptor().layer_of(x)?, trunc.layers)?
        }
        (Construction::Rationals { phi, .. }, GroupDescriptor::Rationals { chain }) => {
            let q = match x {
                GroupPoint::Rational(q) => &q.0,
                _ => unreachable!("membership checked"),
            };
            rationals_conv(phi, chain, &chain_sizes(u)?, q, trunc)?
        }
        (Construction::DirectSum { summands, alphas, epsilon1 }, _) => {
            direct_sum_conv(summands, alphas, epsilon1, x, trunc)?
        }
        (c, _) => return Err(Error::NoClosedFormTail(c.tag().into())),
    };
    let s2 = u.scale() * u.scale();
    Ok(raw.scale(&s2))
}

/// Exact `(u*u)(x)` for a nested-finite weight with a geometric tail.
pub fn pruefer_conv_closed(u: &WeightFn, x: &GroupPoint) -> Result<BigRational> {
    let i = conv_at(u, x, &TruncationSpec::default())?;
    if i.is_point() {
        Ok(i.lo)
    } else {
        Err(Error::NotCertifiable("tail has no exact closed form".into()))
    }
}

fn big(n: &BigUint) -> BigRational {
    rational::from_big(n)
}

/// Layer split: for `x` in `U_n`, `y` in `U_j` with `j < n` puts `x-y` in
/// `U_n`; `j > n` puts it in `U_j`; inside `U_n`, `x - y` meets each
/// lower layer `U_i` exactly `|U_i|` times.
fn nested_conv(phi: &PhiSequence, p: u64, n: u32, layers: Option<u32>) -> Result<Interval> {
    let cut = layers.unwrap_or(n);
    if cut < n {
        return Err(Error::Truncation(format!("layer cutoff {cut} is below the point's layer {n}")));
    }
    let sizes = LayerSizes::PrimePower(p);
    let layer = |j: u32| big(&sizes.layer_size(j).to_biguint().expect("positive"));
    let f = |j: u32| phi.term(j);
    let mut finite = BigRational::zero();
    if n == 1 {
        finite += int(p as i64) * f(1) * f(1);
    } else {
        for j in 1..n {
            finite += int(2) * layer(j) * f(j) * f(n);
        }
        let rest = layer(n) - big(&sizes.group_size(n - 1).to_biguint().expect("positive"));
        finite += rest * f(n) * f(n);
    }
    for j in (n + 1)..=cut {
        finite += layer(j) * f(j) * f(j);
    }
    let tail = phi.closed().square().mul(&sizes.layer_sizes()).tail_sum(cut)?;
    let hi = &finite + &tail.value;
    if layers.is_none() && tail.exact {
        return Ok(Interval::point(hi));
    }
    Ok(Interval::new(finite, hi))
}

/// `max` over the closed cell `[k, k+1]` of `s(floor|y|) s(floor|q-y|)`.
fn cell_max(q: &BigRational, k: i64) -> BigRational {
    let f1 = if k >= 0 { k as u64 } else { (-k - 1) as u64 };
    let a = q - int(k + 1);
    let b = q - int(k);
    let f2 = if !a.is_positive() && !b.is_negative() {
        BigUint::zero()
    } else {
        rational::floor_abs(&a.abs().min(b.abs()))
    };
    sigma_exact(&BigUint::from(f1)) * sigma_exact(&f2)
}

/// Sum of `cell_max` over the cells `k >= from` (when `positive`) or
/// `k <= -from - 1`, closed beyond `|k| >= far` by `1/(3 (far-2-c)^3)`.
fn cell_tail(q: &BigRational, from: i64, positive: bool, far: i64) -> BigRational {
    let c = q.abs().ceil().to_integer().to_i64().expect("window points are small");
    assert!(far >= c + 3 && from < far);
    let mut s = BigRational::zero();
    for k in from..far {
        let cell = if positive { k } else { -k - 1 };
        s += cell_max(q, cell);
    }
    // cells beyond: k >= far gives <= (k-c)^{-4}; k <= -far-1 gives <= (m-1-c)^{-4}
    // with m = -k >= far + 1; both sums are below 1/(3 (far-2-c)^3).
    let d = int(far - 2 - c);
    s + (int(3) * &d * &d * &d).recip()
}

fn rationals_conv(
    phi: &PhiSequence,
    chain: &Chain,
    sizes: &LayerSizes,
    q: &BigRational,
    trunc: &TruncationSpec,
) -> Result<Interval> {
    let (cut, b) = match (trunc.layers, trunc.range) {
        (Some(n), Some(b)) => (n, b),
        _ => return Err(Error::Truncation("the rationals need both a layer cutoff N and a range B".into())),
    };
    let n = chain.layer_of(q)?;
    if cut < n {
        return Err(Error::Truncation(format!("layer cutoff {cut} is below the point's layer {n}")));
    }
    if q.abs() > int(b as i64) {
        return Err(Error::Truncation(format!("range B = {b} does not cover {}", rational::fmt_rational(q))));
    }
    let t_big = chain.term(cut).ok_or_else(|| Error::Truncation(format!("chain has no term t_{cut}")))?;
    let t = t_big.to_i64().filter(|t| (*t as i128) * (b as i128) <= 20_000_000).ok_or_else(|| {
        Error::Truncation(format!("N = {cut}, B = {b} is too large to enumerate"))
    })?;
    let qt = (q * int(t)).to_integer().to_i64().expect("q in Q_N");

    // layer of r/t for each residue r
    let table: Vec<u32> = (0..t)
        .map(|r| chain.layer_of(&BigRational::new(BigInt::from(r), BigInt::from(t))))
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<(u32, u32, i64, i64), u64> = BTreeMap::new();
    let lim = t * b as i64;
    for m in -lim..=lim {
        let l1 = table[m.rem_euclid(t) as usize];
        let l2 = table[(qt - m).rem_euclid(t) as usize];
        let f1 = m.abs() / t;
        let f2 = (qt - m).abs() / t;
        *counts.entry((l1, l2, f1, f2)).or_default() += 1;
    }
    let phis: Vec<BigRational> = (1..=cut).map(|j| phi.term(j)).collect();
    let sig = |f: i64| sigma_exact(&BigUint::from(f as u64));
    let mut finite = BigRational::zero();
    for ((l1, l2, f1, f2), c) in counts {
        finite += int(c as i64) * &phis[l1 as usize - 1] * &phis[l2 as usize - 1] * sig(f1) * sig(f2);
    }

    let c = q.abs().ceil().to_integer().to_i64().expect("small");
    let far = (b as i64 + 1).max(c + 3) + 64;
    // D(q) = sum over all cells; C_out = cells outside [-B, B]
    let d_all = cell_tail(q, 0, true, far) + cell_tail(q, 0, false, far);
    let d_out = cell_tail(q, b as i64, true, far) + cell_tail(q, b as i64, false, far);

    // |y| > B inside Q_N: y in U_j (j <= N), at most t_j points per cell
    let phimax_n = phis[..n as usize].iter().max().expect("n >= 1").clone();
    let mut weight_in = BigRational::zero();
    for j in 1..=cut {
        let pj = &phis[j as usize - 1];
        let partner = if j > n { pj.clone() } else { phimax_n.clone() };
        weight_in += big(&chain.term(j).expect("within the cutoff")) * pj * partner;
    }
    let range_tail = weight_in * d_out;
    // y outside Q_N: y and q-y share the layer j > N
    let layer_tail = phi.closed().square().mul(&sizes.group_sizes()).tail_sum(cut)?.value * d_all;
    let hi = &finite + range_tail + layer_tail;
    Ok(Interval::new(finite, hi))
}

#[derive(Clone)]
struct CoordOption {
    in_y: bool,
    in_xy: bool,
    factor: Interval,
}

/// Splits `y` coordinatewise into `y_j = 0`, `y_j = x_j` and the rest; the
/// rest sums to `(u_j*u_j)(x_j)` minus the two excluded terms.
fn direct_sum_conv(
    summands: &[WeightFn],
    alphas: &[BigRational],
    epsilon1: &BigRational,
    x: &GroupPoint,
    trunc: &TruncationSpec,
) -> Result<Interval> {
    let sp = x.as_sum().expect("membership checked");
    let mut options: Vec<Vec<CoordOption>> = Vec::with_capacity(summands.len());
    for (i, (uj, aj)) in summands.iter().zip(alphas).enumerate() {
        let j = i + 1;
        let zero = uj.descriptor().identity();
        let xj = sp.get(j).cloned().unwrap_or_else(|| zero.clone());
        let conv = conv_at(uj, &xj, &trunc.for_summand(j))?;
        let u0 = uj.eval_exact(&zero)?;
        let a2 = aj * aj;
        let mut opts = Vec::new();
        if xj.is_zero() {
            opts.push(CoordOption { in_y: false, in_xy: false, factor: Interval::point(BigRational::one()) });
            let rest = conv.minus_clamped(&(&u0 * &u0));
            opts.push(CoordOption { in_y: true, in_xy: true, factor: rest.scale(&a2) });
        } else {
            let ux = uj.eval_exact(&xj)?;
            let single = Interval::point(aj * &ux);
            opts.push(CoordOption { in_y: false, in_xy: true, factor: single.clone() });
            opts.push(CoordOption { in_y: true, in_xy: false, factor: single });
            let rest = conv.minus_clamped(&(int(2) * &u0 * &ux));
            opts.push(CoordOption { in_y: true, in_xy: true, factor: rest.scale(&a2) });
        }
        options.push(opts);
    }
    let mut total = Interval::zero();
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut s_y = Vec::new();
        let mut s_xy = Vec::new();
        let mut f = Interval::point(BigRational::one());
        for (j, (opts, &k)) in options.iter().zip(&idx).enumerate() {
            let o = &opts[k];
            if o.in_y {
                s_y.push(j + 1);
            }
            if o.in_xy {
                s_xy.push(j + 1);
            }
            f = &f * &o.factor;
        }
        let a = subset_coeff(epsilon1, &s_y) * subset_coeff(epsilon1, &s_xy);
        total = &total + &f.scale(&a);
        // odometer step
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(total);
            }
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Chain;
    use crate::rational::rat;
    use crate::series::PhiSequence;
    use crate::weights::{direct_sum_weight, pruefer_weight, rationals_weight, AlphaSequence, SubsetCoeffs};

    fn brute_pruefer(u: &WeightFn, p: u64, x: &GroupPoint, m: u32) -> BigRational {
        let d = u.descriptor();
        (0..(p as i64).pow(m))
            .map(|k| {
                let y = GroupPoint::pruefer(p, k, m);
                let z = d.add(x, &y.neg()).unwrap();
                u.eval_exact(&y).unwrap() * u.eval_exact(&z).unwrap()
            })
            .sum()
    }

    #[test]
    fn pruefer_identity_value() {
        let u = pruefer_weight(2).unwrap();
        assert_eq!(pruefer_conv_closed(&u, &GroupPoint::pruefer(2, 0, 0)).unwrap(), rat(15, 112));
    }

    #[test]
    fn truncated_sum_matches_enumeration() {
        for p in [2u64, 3] {
            let u = pruefer_weight(p).unwrap();
            let m = if p == 2 { 7 } else { 5 };
            for n in 0..=3u32 {
                for k in 0..(p as i64).pow(n) {
                    let x = GroupPoint::pruefer(p, k, n);
                    let i = conv_at(&u, &x, &TruncationSpec::layers(m)).unwrap();
                    let b = brute_pruefer(&u, p, &x, m);
                    assert_eq!(i.lo, b, "p={p} x={x}");
                    let full = pruefer_conv_closed(&u, &x).unwrap();
                    assert!(i.contains(&full) && b <= full);
                }
            }
        }
    }

    fn brute_rationals(u: &WeightFn, x: &GroupPoint, t: i64, b: i64) -> BigRational {
        let d = u.descriptor();
        (-t * b..=t * b)
            .map(|k| {
                let y = GroupPoint::rational(rat(k, t));
                let z = d.add(x, &y.neg()).unwrap();
                u.eval_exact(&y).unwrap() * u.eval_exact(&z).unwrap()
            })
            .sum()
    }

    #[test]
    fn rationals_enclosure_matches_enumeration() {
        let u = rationals_weight(Chain::Factorial, PhiSequence::factorial_geometric(int(2))).unwrap();
        for x in [rat(0, 1), rat(1, 2), rat(-5, 3)] {
            let x = GroupPoint::rational(x);
            // Q_3 = (1/6)Z
            let i = conv_at(&u, &x, &TruncationSpec::rationals(3, 12)).unwrap();
            assert_eq!(i.lo, brute_rationals(&u, &x, 6, 12));
            // a larger truncation set stays under the tail bound
            let big = brute_rationals(&u, &x, 24, 40);
            assert!(i.lo < big && big <= i.hi, "{x}");
        }
    }

    #[test]
    fn direct_sum_enclosure_is_consistent() {
        let s = |p| pruefer_weight(p).unwrap().scaled(&rat(1, 2)).unwrap();
        let u = direct_sum_weight(
            vec![s(2), s(3)],
            AlphaSequence::new(vec![rat(1, 3), rat(1, 9)]),
            SubsetCoeffs::new(rat(1, 60)).unwrap(),
        )
        .unwrap();
        let x = u.descriptor().parse_point("1:1/2").unwrap();
        let a = conv_at(&u, &x, &TruncationSpec::per_summand(vec![3, 3])).unwrap();
        let b = conv_at(&u, &x, &TruncationSpec::per_summand(vec![5, 5])).unwrap();
        assert!(a.lo <= b.lo && b.hi <= a.hi, "{a:?} {b:?}");
    }
}
