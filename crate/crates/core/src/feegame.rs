//! The fee optimization game: the retailer picks the referral fee first,
//! then both players play the staying subgame.
//!
//! Inside the continuum outcome region several equilibrium prices exist, so
//! payoffs depend on a pre-agreed strategy profile `rho` mapping each fee to
//! an equilibrium price. The extreme profiles select the lowest
//! (retailer-best) and highest (seller-best) continuum price; any other
//! profile is sandwiched between them.

use crate::demand::DemandCurve;
use crate::equilibrium::{continuum_interval, refined_outcomes_with, Fulfiller};
use crate::fees::threshold_fees;
use crate::payoff::{pi_rr_at, pi_rs_at, pi_ss_at, GameParams, ParamsError};
use crate::prices::{key_prices, retailer_opt_price_for, seller_opt_price_for};
use crate::solve::{golden_max, sweep_max};
use crate::Outcome;

const ALPHA_SWEEP: usize = 10_000;
const ALPHA_TOL: f64 = 1e-10;

/// Piecewise-linear map from fee to continuum price, flat beyond its ends.
#[derive(Debug, Clone)]
pub struct RhoTable {
    points: Vec<(f64, f64)>,
}

impl RhoTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ParamsError> {
        if points.is_empty() {
            return Err(ParamsError::InvalidAlpha(f64::NAN));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ParamsError::InvalidAlpha(w[1].0));
            }
        }
        for &(a, p) in &points {
            if !a.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(ParamsError::InvalidAlpha(a));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn eval(&self, alpha: f64) -> f64 {
        let pts = &self.points;
        if alpha <= pts[0].0 {
            return pts[0].1;
        }
        if alpha >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let i = pts.partition_point(|&(a, _)| a <= alpha);
        let (a0, p0) = pts[i - 1];
        let (a1, p1) = pts[i];
        p0 + (p1 - p0) * (alpha - a0) / (a1 - a0)
    }
}

/// How the players resolve the continuum of equilibrium prices.
#[derive(Debug, Clone)]
pub enum StrategyProfile {
    /// Demand fulfilled at the minimum continuum price (retailer-best).
    RhoLow,
    /// Demand fulfilled at the maximum continuum price (seller-best).
    RhoHigh,
    /// A custom fee-to-price table, clamped into the continuum interval.
    Custom(RhoTable),
}

impl StrategyProfile {
    /// Price selected inside `[lo, hi]`; the flag records table clamping.
    fn select(&self, alpha: f64, lo: f64, hi: f64) -> (f64, bool) {
        match self {
            StrategyProfile::RhoLow => (lo, false),
            StrategyProfile::RhoHigh => (hi, false),
            StrategyProfile::Custom(table) => {
                let raw = table.eval(alpha);
                let clamped = raw.clamp(lo, hi);
                (clamped, (clamped - raw).abs() > 1e-12)
            }
        }
    }
}

/// The realized equilibrium point for one fee under a strategy profile.
#[derive(Debug, Clone)]
pub struct EqPoint {
    pub price: f64,
    pub fulfiller: Fulfiller,
    pub retailer_payoff: f64,
    pub seller_payoff: f64,
    /// True when a custom table price fell outside the continuum and was
    /// clamped back in.
    pub clamped: bool,
}

/// Equilibrium payoffs `(retailer, seller)` of the staying subgame at the
/// outcome selected by `rho`. Piecewise in the fee and continuous across
/// region boundaries.
pub fn eq_payoffs(params: &GameParams, rho: &StrategyProfile) -> (f64, f64) {
    let pt = eq_point(params, rho);
    (pt.retailer_payoff, pt.seller_payoff)
}

/// Like [`eq_payoffs`] but reporting the transaction price and fulfiller.
pub fn eq_point(params: &GameParams, rho: &StrategyProfile) -> EqPoint {
    let kp = key_prices(params);
    let outcomes = refined_outcomes_with(params, &kp);
    // On a region boundary two rows can coexist with equal payoffs; prefer
    // the seller row, where the profile may still choose a price.
    let outcome = outcomes
        .iter()
        .find(|o| o.fulfiller == Fulfiller::Seller)
        .or_else(|| outcomes.first())
        .expect("a valid parameter set always has a refined outcome");
    match outcome.fulfiller {
        Fulfiller::Retailer => {
            let p = outcome.price_lo;
            EqPoint {
                price: p,
                fulfiller: Fulfiller::Retailer,
                retailer_payoff: pi_rr_at(&params.curve, params.c_r, p),
                seller_payoff: 0.0,
                clamped: false,
            }
        }
        Fulfiller::Seller => {
            let (lo, hi) = match continuum_interval(&kp) {
                Some((c_lo, c_hi))
                    if outcome.price_hi - outcome.price_lo > crate::PRICE_TOL =>
                {
                    (c_lo.max(outcome.price_lo), c_hi.min(outcome.price_hi))
                }
                _ => (outcome.price_lo, outcome.price_hi),
            };
            let (p, clamped) = rho.select(params.alpha, lo, hi);
            EqPoint {
                price: p,
                fulfiller: Fulfiller::Seller,
                retailer_payoff: pi_rs_at(&params.curve, params.alpha, p),
                seller_payoff: pi_ss_at(&params.curve, params.c_s, params.alpha, p),
                clamped,
            }
        }
    }
}

/// The fee-peak of the referral payoff at the seller's optimal price.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBarResult {
    /// Smallest maximizer of `pi_rs(p_sstar(alpha), alpha)`.
    pub alpha: f64,
    /// Whether that peak strictly beats the retailer's standalone optimum.
    /// When false the retailer can never gain from the seller selling at its
    /// own optimum.
    pub exceeds_standalone: bool,
}

/// Computes the referral-payoff peak over fees in `(0, 1 - c_s)`.
pub fn alpha_bar(curve: &DemandCurve, c_r: f64, c_s: f64) -> AlphaBarResult {
    let f = |alpha: f64| {
        let p = seller_opt_price_for(curve, c_s, alpha);
        pi_rs_at(curve, alpha, p)
    };
    let hi = 1.0 - c_s;
    let (alpha, value) = sweep_max(f, 1e-9, hi - 1e-9, ALPHA_SWEEP, ALPHA_TOL);
    let p_rstar = retailer_opt_price_for(curve, c_r);
    let standalone = pi_rr_at(curve, c_r, p_rstar);
    AlphaBarResult { alpha, exceeds_standalone: value > standalone }
}

/// Solution of the fee optimization game.
#[derive(Debug, Clone)]
pub struct FeeGameSolution {
    /// Minimum fee attaining the retailer's maximum equilibrium payoff.
    pub alpha_star: f64,
    pub retailer_payoff: f64,
    pub seller_payoff: f64,
    /// The realized outcome at the optimal fee.
    pub outcome: Outcome,
    /// The referral-payoff peak fee, when it beats the standalone optimum.
    pub alpha_bar: Option<f64>,
}

/// Optimal referral fee for given costs and strategy profile.
///
/// Under the low profile the optimum is the retailer feasibility fee in
/// closed form. Under the high profile it is the referral-payoff peak when
/// that peak beats the standalone optimum, and otherwise the fee at which
/// the retailer's indifference price reaches its optimum. Custom profiles
/// are solved by a dense fee sweep with local refinement, ties to the
/// smallest fee.
pub fn alpha_star(
    curve: &DemandCurve,
    c_r: f64,
    c_s: f64,
    rho: &StrategyProfile,
) -> Result<FeeGameSolution, ParamsError> {
    let fees = threshold_fees(curve, c_r, c_s)?;
    let ab = alpha_bar(curve, c_r, c_s);
    let best = match rho {
        StrategyProfile::RhoLow => fees.alpha_rstar,
        StrategyProfile::RhoHigh => {
            if ab.exceeds_standalone {
                ab.alpha
            } else {
                fees.alpha_rdagger
            }
        }
        StrategyProfile::Custom(_) => sweep_alpha_star(curve, c_r, c_s, rho),
    };
    let params = GameParams::new(curve.clone(), c_r, c_s, best, 0.5)?;
    let pt = eq_point(&params, rho);
    Ok(FeeGameSolution {
        alpha_star: best,
        retailer_payoff: pt.retailer_payoff,
        seller_payoff: pt.seller_payoff,
        outcome: Outcome { price_lo: pt.price, price_hi: pt.price, fulfiller: pt.fulfiller },
        alpha_bar: ab.exceeds_standalone.then_some(ab.alpha),
    })
}

/// Dense sweep over the fee axis, smallest-fee tie-breaking, golden-section
/// refinement in the best cell, and a random spot-check of the result.
fn sweep_alpha_star(curve: &DemandCurve, c_r: f64, c_s: f64, rho: &StrategyProfile) -> f64 {
    let payoff = |alpha: f64| -> f64 {
        let params = GameParams::new(curve.clone(), c_r, c_s, alpha, 0.5)
            .expect("sweep stays inside (0,1)");
        eq_payoffs(&params, rho).0
    };
    let n = ALPHA_SWEEP;
    let step = 1.0 / (n + 1) as f64;
    let mut best_i = 1usize;
    let mut best = f64::NEG_INFINITY;
    for i in 1..=n {
        let v = payoff(step * i as f64);
        if v > best + 1e-12 {
            best = v;
            best_i = i;
        }
    }
    let lo = step * (best_i - 1) as f64 + 1e-12;
    let hi = step * (best_i + 1) as f64 - 1e-12;
    let (refined, refined_v) = golden_max(payoff, lo, hi, ALPHA_TOL);
    let (mut out, mut out_v) =
        if refined_v > best { (refined, refined_v) } else { (step * best_i as f64, best) };
    // The payoff is only piecewise unimodal; spot-check against random fees.
    let mut state = 0x2545f4914f6cdd1du64;
    for _ in 0..100 {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let alpha = (state >> 11) as f64 / (1u64 << 53) as f64;
        if alpha <= 0.0 || alpha >= 1.0 {
            continue;
        }
        let v = payoff(alpha);
        if v > out_v + 1e-9 {
            out = alpha;
            out_v = v;
        }
    }
    out
}

/// Payoff and fee intervals every equilibrium of the sequential game obeys.
#[derive(Debug, Clone)]
pub struct PayoffBounds {
    pub retailer: (f64, f64),
    pub seller: (f64, f64),
    pub alpha_star: (f64, f64),
}

/// Bounds that hold for any admissible strategy profile.
pub fn payoff_bounds(
    curve: &DemandCurve,
    c_r: f64,
    c_s: f64,
) -> Result<PayoffBounds, ParamsError> {
    let fees = threshold_fees(curve, c_r, c_s)?;
    let ab = alpha_bar(curve, c_r, c_s);
    let p_rstar = retailer_opt_price_for(curve, c_r);
    let standalone = pi_rr_at(curve, c_r, p_rstar);
    let retailer_hi = pi_rs_at(curve, fees.alpha_rstar, p_rstar);
    let retailer_lo = if ab.exceeds_standalone {
        pi_rs_at(curve, ab.alpha, seller_opt_price_for(curve, c_s, ab.alpha))
    } else {
        standalone
    };
    // The fee floor may be the negative infeasibility sentinel; the payoff
    // kernels extend there and the bound only loosens.
    let floor = fees.alpha_sstar.min(fees.alpha_rdagger);
    let seller_hi = pi_ss_at(curve, c_s, floor, seller_opt_price_for(curve, c_s, floor));
    Ok(PayoffBounds {
        retailer: (retailer_lo, retailer_hi),
        seller: (0.0, seller_hi),
        alpha_star: (floor, fees.alpha_sdagger),
    })
}
