//! The seller's outside option and the full game.
//!
//! If the seller leaves the revenue-sharing program it plays plain Bertrand
//! against the retailer at effective cost `c_s + delta`. Leaving is a
//! credible threat only for `delta` strictly inside `(0, c_r - c_s)`; the
//! leaving outcome prices at the retailer's cost or the seller's standalone
//! optimum, whichever is lower, and pays the retailer nothing. The full game
//! is the fee optimization game with the extra constraint that the seller
//! must weakly prefer staying.

use thiserror::Error;

use crate::demand::{CurveKind, DemandCurve};
use crate::equilibrium::{Fulfiller, Outcome};
use crate::feegame::{eq_payoffs, eq_point, StrategyProfile};
use crate::payoff::{validate_costs, GameParams, ParamsError};
use crate::solve::bisect_root;

const ALPHA_GRID: usize = 10_000;
const ALPHA_TOL: f64 = 1e-10;
/// Slop for the weak stay inequality.
const STAY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OutsideError {
    #[error("{0}")]
    Params(#[from] ParamsError),
    #[error("outside-option cost differential {delta} must lie strictly inside (0, {max})")]
    InvalidDelta { delta: f64, max: f64 },
    #[error("the seller prefers leaving at every fee")]
    NoStayRegion,
}

fn check_delta(c_r: f64, c_s: f64, delta: f64) -> Result<(), OutsideError> {
    validate_costs(c_r, c_s)?;
    let max = c_r - c_s;
    if !(delta > 0.0 && delta < max) {
        return Err(OutsideError::InvalidDelta { delta, max });
    }
    Ok(())
}

/// Outcome of the leaving subgame and the seller's payoff there.
///
/// The seller fulfills at `min(c_r, p)` where `p` maximizes
/// `(p - c_s - delta) q(p)`; the retailer's payoff is zero. Independent of
/// the referral fee.
pub fn leaving_outcome(
    curve: &DemandCurve,
    c_r: f64,
    c_s: f64,
    delta: f64,
) -> Result<(Outcome, f64), OutsideError> {
    check_delta(c_r, c_s, delta)?;
    let cost = c_s + delta;
    let opt = if curve.kind() == CurveKind::Linear {
        0.5 * (1.0 + cost)
    } else {
        bisect_root(|p| curve.q(p) + (p - cost) * curve.dq(p), 0.0, 1.0, ALPHA_TOL)
    };
    let price = c_r.min(opt);
    let payoff = (price - cost) * curve.q(price);
    Ok((Outcome { price_lo: price, price_hi: price, fulfiller: Fulfiller::Seller }, payoff))
}

/// Largest fee at which the seller weakly prefers staying.
#[derive(Debug, Clone, Copy)]
pub struct AlphaMax {
    pub alpha: f64,
    /// False when the feasible fee set had gaps on the scan grid (possible
    /// only for pathological custom profiles); `alpha` is then the largest
    /// feasible fee found.
    pub contiguous: bool,
}

/// Computes the stay threshold by grid scan plus bisection on the boundary
/// cell. The threshold itself satisfies the weak stay inequality.
pub fn alpha_max(
    curve: &DemandCurve,
    c_r: f64,
    c_s: f64,
    delta: f64,
    rho: &StrategyProfile,
) -> Result<AlphaMax, OutsideError> {
    let (_, leave) = leaving_outcome(curve, c_r, c_s, delta)?;
    let seller_eq = |alpha: f64| {
        let params = GameParams::new(curve.clone(), c_r, c_s, alpha, 0.5)
            .expect("grid fees are interior");
        eq_payoffs(&params, rho).1
    };
    scan_alpha_max(&seller_eq, leave)
}

fn scan_alpha_max(seller_eq: &dyn Fn(f64) -> f64, leave: f64) -> Result<AlphaMax, OutsideError> {
    let step = 1.0 / (ALPHA_GRID + 1) as f64;
    let mut last_feasible: Option<usize> = None;
    let mut gaps = false;
    for i in 1..=ALPHA_GRID {
        if seller_eq(step * i as f64) >= leave - STAY_TOL {
            if let Some(prev) = last_feasible {
                if i > prev + 1 {
                    gaps = true;
                }
            }
            last_feasible = Some(i);
        }
    }
    let Some(last) = last_feasible else {
        return Err(OutsideError::NoStayRegion);
    };
    // Refine between the last feasible and first infeasible cell, keeping
    // the reported value on the feasible side.
    let mut lo = step * last as f64;
    let mut hi = (step * (last + 1) as f64).min(1.0 - 1e-9);
    if seller_eq(hi) >= leave - STAY_TOL {
        lo = hi;
    } else {
        while hi - lo > ALPHA_TOL {
            let mid = 0.5 * (lo + hi);
            if seller_eq(mid) >= leave - STAY_TOL {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(AlphaMax { alpha: lo, contiguous: !gaps })
}

/// Solution of the full game with the outside option.
#[derive(Debug, Clone)]
pub struct FullGameSolution {
    /// Minimum fee maximizing the retailer's payoff subject to the seller
    /// weakly preferring to stay.
    pub alpha_star_o: f64,
    /// In refined equilibrium the seller always stays (an indifferent
    /// seller stays).
    pub seller_stays: bool,
    pub alpha_max: f64,
    pub leaving_outcome: Outcome,
    pub leaving_seller_payoff: f64,
    pub retailer_payoff: f64,
    pub seller_payoff: f64,
    pub outcome: Outcome,
}

/// Solves the full game: the unconstrained fee optimum when the seller
/// still prefers staying there, otherwise the best fee inside the stay
/// region (ties to the smallest fee).
pub fn solve_full_game(
    curve: &DemandCurve,
    c_r: f64,
    c_s: f64,
    delta: f64,
    rho: &StrategyProfile,
) -> Result<FullGameSolution, OutsideError> {
    let (leaving, leave_payoff) = leaving_outcome(curve, c_r, c_s, delta)?;
    let payoffs = |alpha: f64| {
        let params = GameParams::new(curve.clone(), c_r, c_s, alpha, 0.5)
            .expect("fees stay interior");
        eq_payoffs(&params, rho)
    };
    let am = {
        let seller_eq = |alpha: f64| payoffs(alpha).1;
        scan_alpha_max(&seller_eq, leave_payoff)?
    };

    let unconstrained = crate::feegame::alpha_star(curve, c_r, c_s, rho)?;
    let best = if payoffs(unconstrained.alpha_star).1 >= leave_payoff - STAY_TOL {
        unconstrained.alpha_star
    } else {
        constrained_argmax(&payoffs, leave_payoff, am.alpha)
    };

    let params = GameParams::new(curve.clone(), c_r, c_s, best, 0.5)?;
    let pt = eq_point(&params, rho);
    Ok(FullGameSolution {
        alpha_star_o: best,
        seller_stays: true,
        alpha_max: am.alpha,
        leaving_outcome: leaving,
        leaving_seller_payoff: leave_payoff,
        retailer_payoff: pt.retailer_payoff,
        seller_payoff: pt.seller_payoff,
        outcome: Outcome { price_lo: pt.price, price_hi: pt.price, fulfiller: pt.fulfiller },
    })
}

/// Grid argmax of the retailer payoff over the stay region, refined locally
/// and compared against the stay boundary itself.
fn constrained_argmax(
    payoffs: &dyn Fn(f64) -> (f64, f64),
    leave: f64,
    boundary: f64,
) -> f64 {
    let step = 1.0 / (ALPHA_GRID + 1) as f64;
    let mut best_alpha = boundary;
    let mut best = payoffs(boundary).0;
    for i in 1..=ALPHA_GRID {
        let alpha = step * i as f64;
        if alpha > boundary {
            break;
        }
        let (r, s) = payoffs(alpha);
        if s >= leave - STAY_TOL && r > best + 1e-12 {
            best = r;
            best_alpha = alpha;
        }
    }
    // Local refinement around an interior grid winner, feasibility-checked.
    if best_alpha < boundary {
        let lo = (best_alpha - step).max(1e-9);
        let hi = (best_alpha + step).min(boundary);
        let (refined, value) = crate::solve::golden_max(|a| payoffs(a).0, lo, hi, ALPHA_TOL);
        if value > best && payoffs(refined).1 >= leave - STAY_TOL {
            // Tie-break toward the smaller fee when payoffs match.
            if value > best + 1e-12 || refined < best_alpha {
                best_alpha = refined;
            }
        }
    }
    best_alpha
}
