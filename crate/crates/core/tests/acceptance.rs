//! End-to-end acceptance suite. Prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lpw_core::certify::{
    build_q_sequence, check_b, check_b_bound, check_q_fractional_bound, check_submultiplicative, conv_at,
    countex_divergence_lower_bound, domar_classify, domar_partial, ess_inf_check, pruefer_conv_closed, Certificate,
    Classification, SubmultMode, TruncationSpec, Verdict, Window,
};
use lpw_core::continuous::{
    beta_segment, beurling_integral, circle_conv_ratio, line_conv_ratio, BeurlingClass, QuadratureSpec,
};
use lpw_core::group::{Chain, GroupDescriptor, GroupPoint};
use lpw_core::rational::{int, rat};
use lpw_core::series::PhiSequence;
use lpw_core::sigma::sigma_subconvolutive_constant;
use lpw_core::weights::{
    algebra_inverse, algebra_weight, builtin_weight, default_alphas, default_coeffs, default_rationals_phi,
    direct_sum_weight, euclidean_weight, nested_finite_weight_unchecked, pruefer_weight, rationals_weight_with,
    scale_for_b, subset_coeff, Builtin, WeightFn, DEFAULT_SIGMA_SCAN,
};
use num_rational::BigRational;
use num_traits::{One, Zero};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn holds(c: &Certificate, what: &str) -> Result<(), String> {
    match &c.verdict {
        Verdict::Holds => Ok(()),
        v => Err(format!("{what}: {v:?}")),
    }
}

fn e<E: std::fmt::Debug>(x: E) -> String {
    format!("{x:?}")
}

/// Summand of a direct sum: pruefer(p) divided by its proven bound.
fn certified_pruefer(p: u64) -> Result<WeightFn, String> {
    let u = pruefer_weight(p).map_err(e)?;
    let b = u.proven_b_bound().ok_or("no bound")?;
    scale_for_b(&u, &b).map_err(e)
}

fn direct_sum() -> Result<WeightFn, String> {
    let summands = vec![certified_pruefer(2)?, certified_pruefer(3)?, certified_pruefer(2)?];
    let alphas = default_alphas(&summands).map_err(e)?;
    direct_sum_weight(summands, alphas, default_coeffs()).map_err(e)
}

fn criterion_1(certs: &mut Vec<Certificate>) -> Outcome {
    let start = Instant::now();
    let u = pruefer_weight(2).map_err(e)?;
    let zero = GroupPoint::pruefer(2, 0, 0);
    let closed = pruefer_conv_closed(&u, &zero).map_err(e)?;
    ensure(closed == rat(15, 112), format!("(u*u)(0) = {closed}"))?;
    let i = conv_at(&u, &zero, &TruncationSpec::default()).map_err(e)?;
    ensure(i.is_point() && i.lo == rat(15, 112), "conv_at is not the exact point 15/112")?;
    let half = u.scaled(&rat(1, 2)).map_err(e)?;
    let w = Window::parse("G_4", half.descriptor(), 0).map_err(e)?;
    ensure(w.points.len() == 16, "G_4 should have 16 points")?;
    let c = check_b(&half, &w, &TruncationSpec::layers(8)).map_err(e)?;
    holds(&c, "check_b on u/2")?;
    certs.push(c);
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), format!("took {t:?}"))?;
    Ok(format!("(u*u)(0) = 15/112 exactly; u/2 subconvolutive on G_4 (N=8); {:.2?}", t))
}

fn criterion_2(certs: &mut Vec<Certificate>) -> Outcome {
    let start = Instant::now();
    let sc = sigma_subconvolutive_constant(DEFAULT_SIGMA_SCAN);
    let z = 1.0 + PI.powi(4) / 45.0;
    ensure(sc.at_zero.contains(z) && sc.at_zero.width() < 1e-6, format!("m=0 enclosure {:?}", sc.at_zero))?;
    ensure(sc.c2.lo >= sc.at_zero.lo, "C2 below the m=0 ratio")?;
    let u = rationals_weight_with(Chain::Factorial, default_rationals_phi(), &sc, false).map_err(e)?;
    let bound = u.proven_b_bound().ok_or("no 2 C mass bound")?;
    let w = Window::parse("Q_3:3", u.descriptor(), 0).map_err(e)?;
    ensure(w.points.len() == 37, "Q_3 on [-3,3] should have 37 points")?;
    let c = check_b_bound(&u, &w, &TruncationSpec::rationals(5, 40), &bound).map_err(e)?;
    holds(&c, "check_b against 2 C mass")?;
    certs.push(c);
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), format!("took {t:?}"))?;
    Ok(format!(
        "C2 in [{:.4}, {:.4}], m=0 term {:.7} encloses 1+pi^4/45; u*u <= 2C mass u on 37 points; {:.2?}",
        sc.c2.lo, sc.c2.hi, sc.at_zero.mid(), t
    ))
}

fn criterion_3(certs: &mut Vec<Certificate>) -> Outcome {
    let eps = default_coeffs().epsilon1().clone();
    let subsets: Vec<Vec<usize>> =
        (0u32..256).map(|m| (1..=8).filter(|j| m & (1 << (j - 1)) != 0).collect()).collect();
    let a = |m: u32| subset_coeff(&eps, &subsets[m as usize]);
    let quarter = rat(1, 4);
    let mut worst = BigRational::zero();
    for s in 0u32..256 {
        let a_s = a(s);
        ensure(a_s > BigRational::zero() && a_s <= BigRational::one(), "a_s outside (0, 1]")?;
        let mut sum = BigRational::zero();
        for v in 0u32..256 {
            ensure(a(s | v) <= a_s, format!("a_(s+v) > a_s at s={s:b} v={v:b}"))?;
            if v & !s == 0 {
                sum += a(v) * a(s & !v) / &a_s;
            }
        }
        ensure(sum <= quarter, format!("subset sum above 1/4 at s={s:b}"))?;
        worst = worst.max(sum);
    }
    let u = direct_sum()?;
    let w = Window::parse("sample:200:6", u.descriptor(), 7).map_err(e)?;
    ensure(w.points.len() == 200, "sample size")?;
    let c = check_b(&u, &w, &TruncationSpec::per_summand(vec![6, 6, 6])).map_err(e)?;
    holds(&c, "check_b on the direct sum")?;
    certs.push(c);
    Ok(format!("a_s constraints over 2^8 subsets (max subset sum {:.5}); u*u <= u on 200 sampled points", lpw_core::rational::to_f64(&worst)))
}

fn criterion_4(certs: &mut Vec<Certificate>) -> Outcome {
    let x = GroupPoint::real(vec![1.0]).map_err(e)?;
    let expect = [
        (Builtin::Poly2, Classification::Convergent),
        (Builtin::Poly2Exp, Classification::Divergent),
        (Builtin::Poly2ExpLog, Classification::Divergent),
    ];
    for (b, want) in expect {
        let v = domar_classify(&builtin_weight(b), &x).map_err(e)?;
        ensure(v.classification == want, format!("{b}: {:?}", v.classification))?;
        certs.push(v.certificate);
    }
    let s = domar_partial(&builtin_weight(Builtin::ExpAbs), &x, 3).map_err(e)?;
    ensure(s[2].exact == Some(rat(11, 6)), format!("S_3 = {:?}", s[2].exact))?;
    Ok("Convergent / Divergent / Divergent; S_3 = 11/6 for e^|t|".into())
}

fn criterion_5(certs: &mut Vec<Certificate>) -> Outcome {
    let x = GroupPoint::real(vec![1.0]).map_err(e)?;
    let spec = QuadratureSpec { cutoff: 100.0, h: 1.0 / 64.0, ..Default::default() };
    let mut parts = Vec::new();
    for (b, want) in [
        (Builtin::Poly2, BeurlingClass::Finite),
        (Builtin::Poly2Exp, BeurlingClass::Infinite),
        (Builtin::Poly2ExpLog, BeurlingClass::Infinite),
    ] {
        let w = builtin_weight(b);
        let r = beurling_integral(&w, &spec).map_err(e)?;
        ensure(r.class == want, format!("{b}: {:?}", r.class))?;
        let d = domar_classify(&w, &x).map_err(e)?.classification;
        let agree = matches!(
            (r.class, d),
            (BeurlingClass::Finite, Classification::Convergent) | (BeurlingClass::Infinite, Classification::Divergent)
        );
        ensure(agree, format!("{b}: integral {:?} vs series {d:?}", r.class))?;
        parts.push(format!("{b} {:?} (int_-100^100 ~ {:.3})", r.class, r.integral.mid()));
        certs.push(r.certificate);
    }
    Ok(parts.join(", "))
}

fn criterion_6(certs: &mut Vec<Certificate>) -> Outcome {
    let seq = build_q_sequence(2).map_err(e)?;
    let qs: Vec<Option<u64>> =
        (1..=2).map(|n| seq.q(n).and_then(|q| q.exact()).and_then(|q| q.try_into().ok())).collect();
    ensure(qs == [Some(2), Some(220)], format!("q = {qs:?}"))?;
    let c1 = check_q_fractional_bound(&seq, 1).map_err(e)?;
    holds(&c1, "{q_1 alpha} bounds")?;
    ensure(c1.payload["frac_lower"] == "1/110", "lower end 1/110")?;
    ensure(c1.payload["two_q_n_over_q_next"] == "1/55", "2 q_1 / q_2 = 1/55")?;
    let up = c1.payload["frac_upper_approx"].as_f64().unwrap();
    ensure(up < 1.0 / 55.0 && up < (-4f64).exp(), "upper end")?;
    certs.push(c1);
    let w = builtin_weight(Builtin::CircleQuarter);
    let d = countex_divergence_lower_bound(&seq, &w).map_err(e)?;
    holds(&d, "per-term bounds")?;
    ensure(d.payload["partial_sum_lower"] == "1/2", "partial sum lower bound 1/2")?;
    certs.push(d);
    let u = algebra_inverse(w, int(2)).map_err(e)?;
    let r = circle_conv_ratio(&u, &QuadratureSpec::default()).map_err(e)?;
    ensure(r.sup.hi.is_finite(), "M not finite")?;
    certs.push(r.certificate);
    let mut worst = 0f64;
    for i in 1..=20 {
        let (v, _) = beta_segment(i as f64 / 21.0);
        worst = worst.max((v - PI).abs());
    }
    ensure(worst < 1e-9, format!("Beta segment error {worst:e}"))?;
    Ok(format!(
        "q = [2, 220]; {{2 alpha}} in (1/110, {up:.6}); sum >= 1/2; M = {:.7}; Beta error {worst:.1e}",
        r.sup.hi
    ))
}

fn criterion_7(certs: &mut Vec<Certificate>) -> Outcome {
    let u = euclidean_weight(1).map_err(e)?;
    let r = line_conv_ratio(&u, &QuadratureSpec::default()).map_err(e)?;
    let mut worst = 0f64;
    for &(t, v, _) in &r.grid {
        worst = worst.max((v - 2.0 * PI * (1.0 + t * t) / (4.0 + t * t)).abs());
    }
    ensure(worst < 1e-6, format!("max deviation {worst:e}"))?;
    ensure(r.sup.contains(2.0 * PI), format!("sup {:?}", r.sup))?;
    ensure(r.at_zero.contains(PI / 2.0), format!("at 0 {:?}", r.at_zero))?;
    certs.push(r.certificate);
    Ok(format!("max deviation {worst:.1e} over {} points; sup in [{:.4}, {:.4}]", r.grid.len(), r.sup.lo, r.sup.hi))
}

fn criterion_8(certs: &mut Vec<Certificate>) -> Outcome {
    // increasing phi on the Pruefer 2-group
    let d = GroupDescriptor::Pruefer { p: 2 };
    let phi = PhiSequence::explicit(vec![rat(1, 64), rat(1, 8), rat(1, 2)], rat(1, 8));
    let bad = nested_finite_weight_unchecked(&d, phi).map_err(e)?;
    let w = Window::parse("G_2", &d, 0).map_err(e)?;
    let c = check_b(&bad, &w, &TruncationSpec::layers(8)).map_err(e)?;
    ensure(c.verdict.is_fails(), format!("increasing phi: {}", c.verdict.label()))?;
    certs.push(c);

    let circle = builtin_weight(Builtin::CircleQuarter);
    let tenth = GroupPoint::circle(rat(1, 10));
    let win = Window::from_points("list:1/10", vec![tenth]);
    let s = check_submultiplicative(&circle, &win, SubmultMode::Exact, 0).map_err(e)?;
    ensure(s.verdict.is_fails(), "t^(1/4) submultiplicative at 1/10")?;
    certs.push(s);

    let grid = Window::parse("circle:64", circle.descriptor(), 0).map_err(e)?;
    let inf = ess_inf_check(&circle, &grid).map_err(e)?;
    ensure(inf.verdict.is_fails(), "t^(1/4) infimum")?;
    certs.push(inf);

    let two = int(2);
    let bases = vec![
        certified_pruefer(2)?,
        certified_pruefer(5)?,
        {
            let u = rationals_weight_with(
                Chain::Factorial,
                default_rationals_phi(),
                &sigma_subconvolutive_constant(DEFAULT_SIGMA_SCAN),
                false,
            )
            .map_err(e)?;
            let b = u.proven_b_bound().unwrap();
            scale_for_b(&u, &b).map_err(e)?
        },
        direct_sum()?,
    ];
    let windows = ["G_4", "G_2", "Q_2:2", "sample:40:3"];
    for (u, spec) in bases.into_iter().zip(windows) {
        let w = algebra_weight(u, two.clone()).map_err(e)?;
        let win = Window::parse(spec, w.descriptor(), 3).map_err(e)?;
        let c = ess_inf_check(&w, &win).map_err(e)?;
        holds(&c, &format!("algebra weight infimum on {spec}"))?;
        certs.push(c);
    }
    Ok("increasing phi fails (b) with witness; t^(1/4) fails at s=t=1/10 and has inf 0; 4 algebra weights bounded below".into())
}

fn suite() -> (Vec<(usize, Outcome)>, Vec<Certificate>) {
    let mut certs = Vec::new();
    let crits: [fn(&mut Vec<Certificate>) -> Outcome; 8] =
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8];
    let out = crits.iter().enumerate().map(|(i, f)| (i + 1, f(&mut certs))).collect();
    (out, certs)
}

fn to_json(certs: &[Certificate]) -> String {
    certs.iter().map(|c| c.to_json()).collect::<Vec<_>>().join("\n")
}

fn main() {
    let (first, certs) = suite();
    let mut ok = true;
    for (i, r) in &first {
        match r {
            Ok(msg) => println!("criterion {i}: PASS  {msg}"),
            Err(msg) => {
                ok = false;
                println!("criterion {i}: FAIL  {msg}")
            }
        }
    }
    let (_, again) = suite();
    let (a, b) = (to_json(&certs), to_json(&again));
    if a == b && !certs.is_empty() {
        println!("criterion 9: PASS  {} certificates, {} bytes, identical across runs", certs.len(), a.len());
    } else {
        ok = false;
        println!("criterion 9: FAIL  certificate JSON differs between runs");
    }
    if !ok {
        std::process::exit(1);
    }
}
