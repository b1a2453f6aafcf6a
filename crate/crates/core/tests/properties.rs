use lpw_core::certify::{
    check_b, check_submultiplicative, domar_classify, domar_partial, weight_equivalence, Certificate, SubmultMode,
    TruncationSpec, Verdict, Window,
};
use lpw_core::continuous::cauchy_conv;
use lpw_core::group::{GroupDescriptor, GroupPoint};
use lpw_core::rational::{int, rat};
use lpw_core::weights::{
    algebra_weight, builtin_weight, pruefer_weight, scale_for_b, Builtin, WeightFn,
};
use proptest::prelude::*;

fn pruefer_point(p: u64) -> impl Strategy<Value = GroupPoint> {
    (0u32..6).prop_flat_map(move |n| (0..(p as i64).pow(n)).prop_map(move |k| GroupPoint::pruefer(p, k, n)))
}

fn rational_point() -> impl Strategy<Value = GroupPoint> {
    (-500i64..500, 1i64..40).prop_map(|(a, b)| GroupPoint::rational(rat(a, b)))
}

fn sum_point() -> impl Strategy<Value = GroupPoint> {
    proptest::collection::btree_map(1usize..5, pruefer_point(3), 0..4).prop_map(GroupPoint::sum)
}

fn group_laws(x: &GroupPoint, y: &GroupPoint, z: &GroupPoint) -> Result<(), TestCaseError> {
    let add = |a: &GroupPoint, b: &GroupPoint| a.add(b).unwrap();
    prop_assert_eq!(add(&add(x, y), z), add(x, &add(y, z)));
    prop_assert_eq!(add(x, y), add(y, x));
    prop_assert!(add(x, &x.neg()).is_zero());
    prop_assert_eq!(x.canonicalize().canonicalize(), x.canonicalize());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn pruefer_group_laws(x in pruefer_point(2), y in pruefer_point(2), z in pruefer_point(2)) {
        group_laws(&x, &y, &z)?;
        // layers are ultrametric
        let d = GroupDescriptor::Pruefer { p: 2 };
        let l = |a: &GroupPoint| d.layer_of(a).unwrap();
        prop_assert!(l(&x.add(&y).unwrap()) <= l(&x).max(l(&y)));
    }

    #[test]
    fn rational_group_laws(x in rational_point(), y in rational_point(), z in rational_point()) {
        group_laws(&x, &y, &z)?;
    }

    #[test]
    fn sum_group_laws(x in sum_point(), y in sum_point(), z in sum_point()) {
        group_laws(&x, &y, &z)?;
    }
}

fn half_pruefer(p: u64) -> WeightFn {
    pruefer_weight(p).unwrap().scaled(&rat(1, 2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn check_b_holds_is_monotone_in_truncation(x in pruefer_point(3), n in 5u32..8, extra in 1u32..4) {
        let u = half_pruefer(3);
        let w = Window::from_points("list", vec![x]);
        let a = check_b(&u, &w, &TruncationSpec::layers(n)).unwrap();
        let b = check_b(&u, &w, &TruncationSpec::layers(n + extra)).unwrap();
        if a.verdict.is_holds() {
            prop_assert!(b.verdict.is_holds());
        }
        prop_assert!(!(a.verdict.is_holds() && b.verdict.is_fails()));
    }

    #[test]
    fn equivalence_with_a_multiple_is_exact(num in 1i64..1000, den in 1i64..1000) {
        let c = rat(num, den);
        let u = half_pruefer(2);
        let w = Window::parse("G_3", u.descriptor(), 0).unwrap();
        let (eq, _) = weight_equivalence(&u.scaled(&c).unwrap(), &u, &w).unwrap();
        prop_assert_eq!(eq.c1.as_rational(), Some(c.clone()));
        prop_assert_eq!(eq.c2.as_rational(), Some(c));
    }

    #[test]
    fn submultiplicativity_matches_all_pairs(ks in proptest::collection::vec(0i64..64, 1..12)) {
        // algebra weight on the Pruefer 2-group, and t^(1/4) on the circle
        let w1 = algebra_weight(scale_for_b(&pruefer_weight(2).unwrap(), &int(2)).unwrap(), int(2)).unwrap();
        let p1: Vec<GroupPoint> = ks.iter().map(|&k| GroupPoint::pruefer(2, k, 6)).collect();
        let w2 = builtin_weight(Builtin::CircleQuarter);
        let p2: Vec<GroupPoint> = ks.iter().map(|&k| GroupPoint::circle(rat(k, 64))).collect();
        for (w, pts) in [(w1, p1), (w2, p2)] {
            let oracle = pts.iter().all(|s| pts.iter().all(|t| {
                let lhs = w.eval(&s.add(t).unwrap()).unwrap();
                let rhs = w.eval(s).unwrap().mul(&w.eval(t).unwrap());
                lhs.to_f64() <= rhs.to_f64() * (1.0 + 1e-12)
            }));
            let win = Window::from_points("list", pts.clone());
            let c = check_submultiplicative(&w, &win, SubmultMode::Exact, 0).unwrap();
            let decided = !matches!(c.verdict, Verdict::Inconclusive { .. });
            prop_assert!(decided);
            prop_assert_eq!(c.verdict.is_holds(), oracle);
        }
    }

    #[test]
    fn certificates_round_trip(x in pruefer_point(2)) {
        let u = half_pruefer(2);
        let c = check_b(&u, &Window::from_points("list", vec![x]), &TruncationSpec::layers(6)).unwrap();
        let s = c.to_json();
        let back: Certificate = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_json(), s);
    }

    #[test]
    fn domar_partial_sums_are_monotone_and_capped(x in -40i32..40, n in 1u32..200) {
        let x = GroupPoint::real(vec![x as f64 / 8.0]).unwrap();
        for b in [Builtin::Poly2, Builtin::ExpAbs, Builtin::Poly2Char] {
            let w = builtin_weight(b);
            let s = domar_partial(&w, &x, n).unwrap();
            prop_assert!(s.windows(2).all(|p| p[0].approx <= p[1].approx));
            if let Some(cap) = domar_classify(&w, &x).unwrap().cap {
                prop_assert!(s.iter().all(|p| p.approx <= cap));
            }
        }
    }

    #[test]
    fn cauchy_error_shrinks_with_h(t in -10.0f64..10.0) {
        // both steps resolve the peak of width ~1/(1+t^2) in the angle
        let (_, e1) = cauchy_conv(t, 1.0 / 128.0);
        let (v, e2) = cauchy_conv(t, 1.0 / 256.0);
        // once both estimates reach the rounding floor they are noise
        prop_assert!(e2 <= e1 || e2 <= 1e-13 * v, "{e1:e} -> {e2:e}");
        prop_assert!((v - 2.0 * std::f64::consts::PI / (4.0 + t * t)).abs() <= e2.max(1e-12));
    }
}
