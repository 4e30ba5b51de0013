//! Property tests for demand curves and payoffs on a family of strictly
//! concave, strictly decreasing curves q(p) = 1 - a p - (1 - a) p^2.

use proptest::prelude::*;

use revshare::{denormalize, normalize, DemandCurve, GameParams, RawDemand};

fn curve_from(a: f64, knots: usize) -> DemandCurve {
    let samples: Vec<(f64, f64)> = (0..=knots)
        .map(|i| {
            let p = i as f64 / knots as f64;
            (p, 1.0 - a * p - (1.0 - a) * p * p)
        })
        .collect();
    DemandCurve::tabulated(samples).unwrap()
}

proptest! {
    #[test]
    fn evaluator_strictly_decreases(a in 0.05f64..0.95, knots in 5usize..40) {
        let curve = curve_from(a, knots);
        prop_assert!(curve.validate().is_valid());
        let mut prev = curve.evaluate(0.0).unwrap();
        prop_assert!((prev - 1.0).abs() < 1e-12);
        for k in 1..=500 {
            let p = k as f64 / 500.0;
            let q = curve.evaluate(p).unwrap();
            prop_assert!(q < prev, "q({p}) = {q} did not decrease from {prev}");
            prop_assert!(q >= -1e-12);
            prev = q;
        }
        prop_assert!(prev.abs() < 1e-9);
    }

    #[test]
    fn revenue_is_strictly_concave_over_price_triples(
        a in 0.05f64..0.95,
        knots in 5usize..40,
        p1 in 0.01f64..0.9,
        gap1 in 0.01f64..0.3,
        gap2 in 0.01f64..0.3,
    ) {
        let curve = curve_from(a, knots);
        let (p2, p3) = (p1 + gap1, p1 + gap1 + gap2);
        prop_assume!(p3 <= 1.0);
        let r = |p: f64| p * curve.evaluate(p).unwrap();
        let d1 = (r(p2) - r(p1)) / (p2 - p1);
        let d2 = (r(p3) - r(p2)) / (p3 - p2);
        prop_assert!(d2 < d1, "revenue not concave over ({p1},{p2},{p3})");
    }

    #[test]
    fn normalize_after_denormalize_is_identity(
        a in 0.05f64..0.95,
        knots in 5usize..30,
        p_max in 0.1f64..50.0,
        q0 in 0.1f64..1000.0,
    ) {
        let curve = curve_from(a, knots);
        let raw = denormalize(&curve, p_max, q0);
        let back = normalize(&raw).unwrap();
        for (orig, round) in curve.samples().iter().zip(back.samples()) {
            prop_assert!((orig.0 - round.0).abs() < 1e-12);
            prop_assert!((orig.1 - round.1).abs() < 1e-12);
        }
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            prop_assert!(
                (curve.evaluate(p).unwrap() - back.evaluate(p).unwrap()).abs() < 1e-12
            );
        }
    }

    #[test]
    fn raw_tables_normalize_to_unit_endpoints(
        a in 0.05f64..0.95,
        p_max in 0.1f64..20.0,
        q0 in 0.5f64..500.0,
    ) {
        let samples: Vec<(f64, f64)> = (0..=12)
            .map(|i| {
                let p = i as f64 / 12.0;
                (p * p_max, q0 * (1.0 - a * p - (1.0 - a) * p * p))
            })
            .collect();
        let raw = RawDemand::new(p_max, q0, samples).unwrap();
        let curve = normalize(&raw).unwrap();
        prop_assert!((curve.evaluate(0.0).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(curve.evaluate(1.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn tie_payoffs_mix_single_fulfiller_payoffs(
        c_r in 0.1f64..0.95,
        span in 0.05f64..0.9,
        alpha in 0.01f64..0.99,
        beta in 0.0f64..1.0,
        p in 0.0f64..1.0,
    ) {
        let c_s = c_r * (1.0 - span).max(0.01);
        prop_assume!(c_s > 0.0 && c_s < c_r);
        let g = GameParams::new(DemandCurve::linear(), c_r, c_s, alpha, beta).unwrap();
        let (r, s) = g.joint_payoffs(p, p).unwrap();
        let want_r = beta * g.pi_rr(p).unwrap() + (1.0 - beta) * g.pi_rs(p).unwrap();
        let want_s = (1.0 - beta) * g.pi_ss(p).unwrap();
        prop_assert!((r - want_r).abs() < 1e-12);
        prop_assert!((s - want_s).abs() < 1e-12);
    }
}
