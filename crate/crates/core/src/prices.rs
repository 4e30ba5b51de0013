//! Key prices of the staying subgame.
//!
//! For fixed parameters these are: each player's optimal single-fulfiller
//! price (`p_rstar`, `p_sstar`), the revenue-maximizing price (`p_tilde`),
//! the indifference prices at which a player stops caring who fulfills
//! (`p_rind`, `p_sind`), and `p_dagger`, the largest price at which the
//! retailer's referral payoff equals its best standalone payoff.
//!
//! Linear demand uses closed forms; other curves use bisection on the
//! first-order condition, which converges because every payoff here is
//! strictly concave in price.

use crate::demand::{CurveKind, DemandCurve};
use crate::payoff::{pi_rr_at, pi_rs_at, GameParams};
use crate::solve::bisect_root;

/// Bisection tolerance in price.
const ROOT_TOL: f64 = 1e-10;

/// The key prices for one set of parameters.
///
/// `p_rind` and `p_sind` are reported unclamped even when they exceed 1;
/// downstream logic treats `p_sind >= 1` as the high-fee edge case.
/// `p_dagger` is absent when no price gives the retailer a referral payoff
/// matching its standalone optimum.
#[derive(Debug, Clone)]
pub struct KeyPrices {
    pub p_rstar: f64,
    pub p_sstar: f64,
    pub p_tilde: f64,
    pub p_rind: f64,
    pub p_sind: f64,
    pub p_dagger: Option<f64>,
}

/// Maximizer of `(p - c_r) q(p)` on `[0, 1]`.
pub fn retailer_opt_price(params: &GameParams) -> f64 {
    retailer_opt_price_for(&params.curve, params.c_r)
}

pub(crate) fn retailer_opt_price_for(curve: &DemandCurve, c_r: f64) -> f64 {
    if curve.kind() == CurveKind::Linear {
        return 0.5 * (1.0 + c_r);
    }
    // d/dp (p - c_r) q(p) = q + (p - c_r) q' is positive at 0, negative at 1.
    bisect_root(|p| curve.q(p) + (p - c_r) * curve.dq(p), 0.0, 1.0, ROOT_TOL)
}

/// Maximizer of `((1 - alpha) p - c_s) q(p)` on `[0, 1]`; equals 1 once the
/// fee leaves the seller no profitable price.
pub fn seller_opt_price(params: &GameParams) -> f64 {
    seller_opt_price_for(&params.curve, params.c_s, params.alpha)
}

pub(crate) fn seller_opt_price_for(curve: &DemandCurve, c_s: f64, alpha: f64) -> f64 {
    if alpha >= 1.0 - c_s {
        return 1.0;
    }
    let s = c_s / (1.0 - alpha); // effective unit cost
    if curve.kind() == CurveKind::Linear {
        return 0.5 * (1.0 + s);
    }
    bisect_root(|p| curve.q(p) + (p - s) * curve.dq(p), 0.0, 1.0, ROOT_TOL)
}

/// Maximizer of revenue `p q(p)`; independent of costs and fee.
pub fn revenue_peak_price(curve: &DemandCurve) -> f64 {
    if curve.kind() == CurveKind::Linear {
        return 0.5;
    }
    bisect_root(|p| curve.q(p) + p * curve.dq(p), 0.0, 1.0, ROOT_TOL)
}

/// Indifference prices `(p_rind, p_sind) = (c_r, c_s) / (1 - alpha)`,
/// returned unclamped.
pub fn indifference_prices(params: &GameParams) -> (f64, f64) {
    let scale = 1.0 / (1.0 - params.alpha);
    (params.c_r * scale, params.c_s * scale)
}

/// Largest price at which the retailer's referral payoff equals its optimal
/// standalone payoff; absent below the fee at which that price would pass
/// under the retailer's optimum and stop mattering for equilibria.
pub fn p_dagger(params: &GameParams) -> Option<f64> {
    p_dagger_for(&params.curve, params.c_r, params.alpha)
}

pub(crate) fn p_dagger_for(curve: &DemandCurve, c_r: f64, alpha: f64) -> Option<f64> {
    let p_rstar = retailer_opt_price_for(curve, c_r);
    let target = pi_rr_at(curve, c_r, p_rstar);
    // The root only exists at or above p_rstar once the referral payoff
    // there reaches the standalone optimum, which is the alpha_rdagger
    // condition in closed form.
    if pi_rs_at(curve, alpha, p_rstar) < target - 1e-12 {
        return None;
    }
    // pi_rs decreases beyond the revenue peak, so the larger root brackets
    // between p_tilde (above target) and 1 (payoff 0 < target).
    Some(bisect_root(
        |p| pi_rs_at(curve, alpha, p) - target,
        revenue_peak_price(curve),
        1.0,
        ROOT_TOL,
    ))
}

/// All key prices for one parameter set.
pub fn key_prices(params: &GameParams) -> KeyPrices {
    let (p_rind, p_sind) = indifference_prices(params);
    KeyPrices {
        p_rstar: retailer_opt_price(params),
        p_sstar: seller_opt_price(params),
        p_tilde: revenue_peak_price(&params.curve),
        p_rind,
        p_sind,
        p_dagger: p_dagger(params),
    }
}
