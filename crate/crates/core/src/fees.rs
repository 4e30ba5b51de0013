//! Threshold fees.
//!
//! Five fee levels partition parameter space by flipping the ordering of key
//! prices, plus the seller optimal feasibility cost `c_sstar` that decides
//! which case structure applies:
//!
//! - `alpha_rstar`: `p_sind <= p_rstar` iff fee is below it
//! - `alpha_sstar`: `p_rind <= p_sstar` iff fee is below it (fixed point;
//!   may be negative, meaning no fee admits that ordering)
//! - `alpha_opt`: `p_sstar <= p_rstar` iff fee is below it
//! - `alpha_rdagger`: `p_rind <= p_rstar` iff fee is below it
//! - `alpha_sdagger`: largest fee at which the seller's breakeven price
//!   still earns the retailer its standalone optimum (no closed form)

use crate::demand::{CurveKind, DemandCurve};
use crate::payoff::{pi_rr_at, validate_costs, ParamsError};
use crate::prices::{retailer_opt_price_for, seller_opt_price_for};
use crate::solve::bisect_root;

const FEE_TOL: f64 = 1e-10;

/// Threshold fees for fixed costs and demand curve.
#[derive(Debug, Clone)]
pub struct ThresholdFees {
    pub alpha_rstar: f64,
    /// Negative when no fee makes the seller's optimum reachable before the
    /// retailer's indifference price.
    pub alpha_sstar: f64,
    /// The optimality switching fee `1 - c_s / c_r`.
    pub alpha_opt: f64,
    pub alpha_rdagger: f64,
    pub alpha_sdagger: f64,
    pub c_sstar: f64,
}

/// Computes all threshold fees. Errors if the cost ordering is invalid.
pub fn threshold_fees(
    curve: &DemandCurve,
    c_r: f64,
    c_s: f64,
) -> Result<ThresholdFees, ParamsError> {
    validate_costs(c_r, c_s)?;
    let p_rstar = retailer_opt_price_for(curve, c_r);
    let alpha_rstar = 1.0 - c_s / p_rstar;
    let alpha_rdagger = 1.0 - c_r / p_rstar;
    let alpha_opt = 1.0 - c_s / c_r;
    let c_sstar = c_r * c_r / p_rstar;
    let alpha_sstar = solve_alpha_sstar(curve, c_r, c_s);
    let alpha_sdagger = solve_alpha_sdagger(curve, c_r, c_s, p_rstar, alpha_rstar);
    Ok(ThresholdFees {
        alpha_rstar,
        alpha_sstar,
        alpha_opt,
        alpha_rdagger,
        alpha_sdagger,
        c_sstar,
    })
}

/// Fixed point of `p_rind(alpha) = p_sstar(alpha)`.
///
/// `p_sstar` itself depends on the fee, so for general curves we scan the
/// sign of `p_rind - p_sstar` over the feasible fee range and bisect. When
/// the difference is positive already at fee zero, no crossing exists in
/// (0, 1 - c_s); the scan start is then extrapolated linearly below zero as
/// an explicit "infeasible" sentinel.
fn solve_alpha_sstar(curve: &DemandCurve, c_r: f64, c_s: f64) -> f64 {
    if curve.kind() == CurveKind::Linear {
        // c_r / (1 - a) = (1 + c_s / (1 - a)) / 2 solves to a = 1 - 2 c_r + c_s.
        return 1.0 - 2.0 * c_r + c_s;
    }
    let g = |alpha: f64| c_r / (1.0 - alpha) - seller_opt_price_for(curve, c_s, alpha);
    let hi = 1.0 - c_s;
    const SCAN: usize = 1000;
    let step = (hi - 2e-9) / SCAN as f64;
    let mut prev_a = 1e-9;
    let prev_g = g(prev_a);
    if prev_g >= 0.0 {
        // Infeasible: extrapolate the first scan segment back to zero.
        let a1 = prev_a + step;
        let g1 = g(a1);
        let slope = (g1 - prev_g) / step;
        if slope.abs() < 1e-15 {
            return -1.0 + 1e-9;
        }
        return (prev_a - prev_g / slope).max(-1.0 + 1e-9);
    }
    for i in 1..=SCAN {
        let a = 1e-9 + step * i as f64;
        if g(a) >= 0.0 {
            return bisect_root(g, prev_a, a, FEE_TOL);
        }
        prev_a = a;
    }
    // p_rind exceeds every price at the top of the range, so a crossing
    // should always appear; fall back to the endpoint defensively.
    hi
}

/// Largest fee at which `pi_rs(p_sind(alpha), alpha)` still matches the
/// retailer's standalone optimum.
///
/// On `[alpha_rstar, 1 - c_s]` the seller breakeven price runs from `p_rstar`
/// to 1, past the referral-payoff peak, so the objective is strictly
/// decreasing and bisection returns the largest root.
fn solve_alpha_sdagger(
    curve: &DemandCurve,
    c_r: f64,
    c_s: f64,
    p_rstar: f64,
    alpha_rstar: f64,
) -> f64 {
    let target = pi_rr_at(curve, c_r, p_rstar);
    let h = |alpha: f64| {
        let p_sind = c_s / (1.0 - alpha);
        if p_sind >= 1.0 {
            return -target;
        }
        (p_sind - c_s) * curve.q(p_sind) - target
    };
    bisect_root(h, alpha_rstar, 1.0 - c_s, FEE_TOL)
}
