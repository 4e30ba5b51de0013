//! Payoff functions of the staying subgame.
//!
//! Subscript convention: the first index is the player receiving the payoff,
//! the second is the player fulfilling all demand. The retailer always
//! collects the referral fee `alpha` on the seller's revenue, so `pi_rs` is
//! the retailer's payoff when the seller fulfills. All functions are pure.

use thiserror::Error;

use crate::demand::{DemandCurve, DemandError};

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("costs must satisfy 0 < c_s < c_r < 1 (got c_r = {c_r}, c_s = {c_s})")]
    InvalidCosts { c_r: f64, c_s: f64 },
    #[error("referral fee must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("tie split must lie in [0, 1], got {0}")]
    InvalidBeta(f64),
}

/// Validated parameters of the staying subgame.
#[derive(Debug, Clone)]
pub struct GameParams {
    pub curve: DemandCurve,
    pub c_r: f64,
    pub c_s: f64,
    pub alpha: f64,
    /// Fraction of demand served by the retailer on a price tie. Defaults to
    /// 0.5; equilibrium sets are independent of it.
    pub beta: f64,
}

impl GameParams {
    pub fn new(
        curve: DemandCurve,
        c_r: f64,
        c_s: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self, ParamsError> {
        validate_costs(c_r, c_s)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ParamsError::InvalidAlpha(alpha));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(ParamsError::InvalidBeta(beta));
        }
        Ok(Self { curve, c_r, c_s, alpha, beta })
    }

    /// Same costs and curve with a different referral fee.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ParamsError> {
        Self::new(self.curve.clone(), self.c_r, self.c_s, alpha, self.beta)
    }

    /// Retailer's payoff when the retailer fulfills all demand at `p`.
    pub fn pi_rr(&self, p: f64) -> Result<f64, DemandError> {
        check_price(p)?;
        Ok(pi_rr_at(&self.curve, self.c_r, p))
    }

    /// Retailer's payoff when the seller fulfills all demand at `p`.
    pub fn pi_rs(&self, p: f64) -> Result<f64, DemandError> {
        check_price(p)?;
        Ok(pi_rs_at(&self.curve, self.alpha, p))
    }

    /// Seller's payoff when the seller fulfills all demand at `p`.
    pub fn pi_ss(&self, p: f64) -> Result<f64, DemandError> {
        check_price(p)?;
        Ok(pi_ss_at(&self.curve, self.c_s, self.alpha, p))
    }

    /// Payoffs `(retailer, seller)` of the full two-price game: the lower
    /// price captures all demand, ties split `beta` to the retailer.
    pub fn joint_payoffs(&self, p_r: f64, p_s: f64) -> Result<(f64, f64), DemandError> {
        check_price(p_r)?;
        check_price(p_s)?;
        if p_r < p_s {
            Ok((pi_rr_at(&self.curve, self.c_r, p_r), 0.0))
        } else if p_r > p_s {
            Ok((
                pi_rs_at(&self.curve, self.alpha, p_s),
                pi_ss_at(&self.curve, self.c_s, self.alpha, p_s),
            ))
        } else {
            let b = self.beta;
            let r = b * pi_rr_at(&self.curve, self.c_r, p_r)
                + (1.0 - b) * pi_rs_at(&self.curve, self.alpha, p_s);
            let s = (1.0 - b) * pi_ss_at(&self.curve, self.c_s, self.alpha, p_s);
            Ok((r, s))
        }
    }
}

pub(crate) fn validate_costs(c_r: f64, c_s: f64) -> Result<(), ParamsError> {
    if !(0.0 < c_s && c_s < c_r && c_r < 1.0) {
        return Err(ParamsError::InvalidCosts { c_r, c_s });
    }
    Ok(())
}

fn check_price(p: f64) -> Result<(), DemandError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DemandError::OutOfDomain(p));
    }
    Ok(())
}

// Raw payoff kernels. No domain checks; also usable with fee values outside
// (0, 1) where the algebra extends (payoff bound computations need that).

pub(crate) fn pi_rr_at(curve: &DemandCurve, c_r: f64, p: f64) -> f64 {
    (p - c_r) * curve.q(p)
}

pub(crate) fn pi_rs_at(curve: &DemandCurve, alpha: f64, p: f64) -> f64 {
    alpha * p * curve.q(p)
}

pub(crate) fn pi_ss_at(curve: &DemandCurve, c_s: f64, alpha: f64, p: f64) -> f64 {
    ((1.0 - alpha) * p - c_s) * curve.q(p)
}
