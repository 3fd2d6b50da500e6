use aoc_core::curves::{
    aoi_deviation, default_horizon, horizontal_deviation, min_plus_conv, Breakpoint, Curve, LatencyRate, PwlCurve,
    Rounding, Staircase,
};
use proptest::prelude::*;

/// Curve from per-breakpoint (gap to previous, upward jump, slope) triples.
fn build(shape: &[(f64, f64, f64)]) -> PwlCurve {
    let mut pts = Vec::with_capacity(shape.len());
    let (mut t, mut v, mut slope) = (0.0, 0.0, 0.0);
    for (i, &(gap, jump, s)) in shape.iter().enumerate() {
        let nt = if i == 0 { 0.0 } else { t + gap };
        v += slope * (nt - t) + jump;
        t = nt;
        slope = s;
        pts.push(Breakpoint::new(t, v, s));
    }
    PwlCurve::new(pts).unwrap()
}

fn shape() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.1..4.0f64, prop_oneof![Just(0.0), 0.0..3.0f64], prop_oneof![Just(0.0), 0.0..3.0f64]), 1..6)
}

fn max_slope(shape: &[(f64, f64, f64)]) -> f64 {
    shape.iter().map(|s| s.2).fold(0.0, f64::max)
}

fn grid_conv(f: &PwlCurve, g: &PwlCurve, t: f64, n: usize) -> f64 {
    (0..=n)
        .map(|i| t * i as f64 / n as f64)
        .map(|s| f.eval(s) + g.eval(t - s))
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn upper_inverse_dominates_lower(sh in shape(), y in 0.0..20.0f64) {
        let f = build(&sh);
        prop_assert!(f.upper_inverse(y) >= f.lower_inverse(y));
    }

    #[test]
    fn staircase_inverses_are_ordered(step in 0.1..5.0f64, width in 0.1..5.0f64, shift in -2.0..2.0f64, floor in any::<bool>(), y in 0.0..20.0f64) {
        let rounding = if floor { Rounding::Floor } else { Rounding::Ceil };
        let c = Curve::from(Staircase::new(step, width, rounding, shift).unwrap());
        prop_assert!(c.upper_inverse(y) >= c.lower_inverse(y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conv_is_commutative(a in shape(), b in shape()) {
        let (f, g) = (Curve::from(build(&a)), Curve::from(build(&b)));
        let horizon = 12.0;
        let fg = min_plus_conv(&f, &g, horizon).unwrap();
        let gf = min_plus_conv(&g, &f, horizon).unwrap();
        for i in 0..=240 {
            let t = horizon * i as f64 / 240.0;
            prop_assert!((fg.eval(t) - gf.eval(t)).abs() <= 1e-9 * fg.eval(t).max(1.0), "t={}", t);
        }
    }

    #[test]
    fn conv_matches_grid_oracle(a in shape(), b in shape()) {
        let (f, g) = (build(&a), build(&b));
        let horizon = 10.0;
        let n = 4000;
        let conv = min_plus_conv(&Curve::from(f.clone()), &Curve::from(g.clone()), horizon).unwrap();
        let slack = (max_slope(&a) + max_slope(&b)) * horizon / n as f64 + 1e-9;
        for i in 1..=50 {
            let t = horizon * i as f64 / 50.0;
            let oracle = grid_conv(&f, &g, t, n);
            let got = conv.eval(t);
            prop_assert!(got <= oracle + 1e-9, "t={} got {} oracle {}", t, got, oracle);
            prop_assert!(got >= oracle - slack, "t={} got {} oracle {}", t, got, oracle);
        }
    }

    #[test]
    fn conv_is_isotone(a in shape(), b in shape(), extra in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 6)) {
        let bigger: Vec<_> = a.iter().zip(&extra).map(|(&(gap, j, s), &(dj, ds))| (gap, j + dj, s + ds)).collect();
        let (f, f2, g) = (Curve::from(build(&a)), Curve::from(build(&bigger)), Curve::from(build(&b)));
        let horizon = 12.0;
        let lo = min_plus_conv(&f, &g, horizon).unwrap();
        let hi = min_plus_conv(&f2, &g, horizon).unwrap();
        for i in 0..=120 {
            let t = horizon * i as f64 / 120.0;
            prop_assert!(lo.eval(t) <= hi.eval(t) + 1e-9, "t={}", t);
        }
    }

    #[test]
    fn aoi_dominates_virtual_delay(l in 0.1..3.0f64, w in 0.5..8.0f64, load in 0.1..0.95f64, t0 in 0.0..5.0f64) {
        let upper = Curve::from(Staircase::ceil(l, w).unwrap());
        let lower = Curve::from(Staircase::floor(l, w).unwrap());
        let s = Curve::from(LatencyRate::new(l / w / load, t0).unwrap());
        let h = default_horizon(&s, &upper, &lower, 0.0);
        let aoi = aoi_deviation(&s, &upper, &lower, 0.0, h).unwrap();
        let v = horizontal_deviation(&upper, &s, h).unwrap();
        prop_assert!(aoi >= v - 1e-12, "{} < {}", aoi, v);
    }

    #[test]
    fn continuous_envelope_gives_equality(rate in 0.1..3.0f64, load in 0.1..0.95f64, t0 in 0.0..5.0f64) {
        let env = Curve::from(PwlCurve::rate(rate).unwrap());
        let s = Curve::from(LatencyRate::new(rate / load, t0).unwrap());
        let h = default_horizon(&s, &env, &env, 0.0);
        let aoi = aoi_deviation(&s, &env, &env, 0.0, h).unwrap();
        let v = horizontal_deviation(&env, &s, h).unwrap();
        prop_assert!((aoi - v).abs() <= 1e-9 * v.max(1.0), "{} vs {}", aoi, v);
    }

    #[test]
    fn aoi_is_monotone(
        l in 0.1..3.0f64, w in 0.5..8.0f64, load in 0.1..0.9f64, t0 in 0.0..5.0f64,
        faster in 1.0..2.0f64, sooner in 0.0..1.0f64, denser in 0.5..1.0f64, burst in 0.0..2.0f64,
    ) {
        let rate = l / w / load;
        let s = Curve::from(LatencyRate::new(rate, t0).unwrap());
        let s_big = Curve::from(LatencyRate::new(rate * faster, t0 * sooner).unwrap());
        let upper = Curve::from(PwlCurve::token_bucket(l / w, l + burst).unwrap());
        let upper_small = Curve::from(PwlCurve::token_bucket(l / w, l).unwrap());
        let lower = Curve::from(Staircase::floor(l, w).unwrap());
        let lower_big = Curve::from(Staircase::floor(l, w * denser).unwrap());
        let eval = |s: &Curve, u: &Curve, lo: &Curve| {
            let h = default_horizon(s, u, lo, 0.0);
            aoi_deviation(s, u, lo, 0.0, h).unwrap()
        };
        let base = eval(&s, &upper, &lower);
        let tol = 1e-9 * base.max(1.0);
        prop_assert!(eval(&s_big, &upper, &lower) <= base + tol);
        prop_assert!(eval(&s, &upper_small, &lower) <= base + tol);
        prop_assert!(eval(&s, &upper, &lower_big) <= base + tol);
    }

    #[test]
    fn closed_form_with_losses(l in 0.1..3.0f64, w in 0.5..8.0f64, load in 0.05..1.0f64, t0 in 0.0..5.0f64, eta in 0u32..4) {
        let c = l / w / load;
        let upper = Curve::from(Staircase::ceil(l, w).unwrap());
        let lower = Curve::from(Staircase::floor(l, w).unwrap());
        let s = Curve::from(LatencyRate::new(c, t0).unwrap());
        let threshold = f64::from(eta) * l;
        let h = default_horizon(&s, &upper, &lower, threshold);
        let got = aoi_deviation(&s, &upper, &lower, threshold, h).unwrap();
        let want = (f64::from(eta) + 1.0) * w + t0;
        prop_assert!((got - want).abs() <= 1e-9 * want, "{} vs {}", got, want);
    }
}

#[test]
fn curve_json_round_trip() {
    let c = Curve::from(build(&[(0.0, 1.0, 0.5), (2.0, 0.0, 0.0), (1.0, 3.0, 2.0)]));
    assert_eq!(Curve::from_json(&c.to_json()).unwrap(), c);
}
