//! Solver for the shared-revenue Bertrand game.
//!
//! Two players — a retailer and an independent seller with lower cost — sell
//! an identical good. Whenever the seller fulfills demand, a referral fee
//! `alpha` transfers that fraction of the seller's revenue to the retailer.
//! This crate computes, for any concave normalized demand curve:
//!
//! - the key prices of the staying subgame ([`prices`]),
//! - the threshold fees partitioning parameter space ([`fees`]),
//! - Nash equilibrium sets with admissibility and relative-Pareto
//!   refinements, reduced to equilibrium outcomes ([`equilibrium`]),
//! - the retailer's optimal fee and payoff bounds when it moves first
//!   ([`feegame`]),
//! - the full game where the seller may leave and sell independently at cost
//!   `c_s + delta` ([`outside`]),
//!
//! all cross-checked by a brute-force best-response oracle on price grids
//! ([`oracle`]) that depends only on the payoff definitions.

pub mod demand;
pub mod equilibrium;
pub mod feegame;
pub mod fees;
pub mod oracle;
pub mod outside;
pub mod payoff;
pub mod prices;
mod solve;

pub use demand::{denormalize, normalize, CurveKind, DemandCurve, DemandError, RawDemand};
pub use equilibrium::{
    admissible_set, is_nash, nash_set, refined_outcomes, EquilibriumFamily, FamilyVariant,
    Fulfiller, NashCheck, Outcome, RefinementStatus,
};
pub use feegame::{
    alpha_bar, alpha_star, eq_payoffs, payoff_bounds, AlphaBarResult, FeeGameSolution,
    PayoffBounds, RhoTable, StrategyProfile,
};
pub use fees::{threshold_fees, ThresholdFees};
pub use outside::{
    alpha_max, leaving_outcome, solve_full_game, AlphaMax, FullGameSolution, OutsideError,
};
pub use payoff::{GameParams, ParamsError};
pub use prices::{
    indifference_prices, key_prices, p_dagger, retailer_opt_price, revenue_peak_price,
    seller_opt_price, KeyPrices,
};

/// Absolute tolerance for price-interval comparisons throughout the crate.
pub const PRICE_TOL: f64 = 1e-9;
