//! Nash equilibria of the staying subgame, refinements, and outcomes.
//!
//! Equilibria come in three family shapes: a shared-price interval where the
//! seller fulfills (there are provably no shared-price equilibria where the
//! retailer fulfills), the retailer fixed at its optimum with the seller
//! anywhere above `p_dagger`, and the seller fixed at its optimum with the
//! retailer anywhere above. Admissibility strikes weakly dominated prices,
//! the relative-Pareto step removes the one dominated family, and what
//! remains collapses to `(price interval, fulfiller)` outcomes.
//!
//! Interval guards are evaluated with closed (non-strict) comparisons, so a
//! fee sitting exactly on a region boundary can return two outcome rows.

use crate::demand::DemandError;
use crate::payoff::GameParams;
use crate::prices::{key_prices, KeyPrices};
use crate::PRICE_TOL as TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fulfiller {
    Retailer,
    Seller,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyVariant {
    /// Both players at the same price in `[lo, hi]`; the seller fulfills.
    SharedSellerInterval { lo: f64, hi: f64 },
    /// Retailer fixed at `p_r` and fulfilling; seller anywhere in
    /// `[seller_lo, seller_hi]` above it.
    RetailerFixedSellerAbove { p_r: f64, seller_lo: f64, seller_hi: f64 },
    /// Seller fixed at `p_s` and fulfilling; retailer anywhere in
    /// `[retailer_lo, retailer_hi]` above it.
    SellerFixedRetailerAbove { p_s: f64, retailer_lo: f64, retailer_hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementStatus {
    Unrefined,
    Admissible,
    AdmissiblePareto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumFamily {
    pub variant: FamilyVariant,
    pub refinement_status: RefinementStatus,
}

/// An equilibrium outcome: the interval of prices at which the transaction
/// can happen and who fulfills demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub price_lo: f64,
    pub price_hi: f64,
    pub fulfiller: Fulfiller,
}

/// Deviation directions checked by [`is_nash`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NashCondition {
    RetailerUndercut,
    RetailerRaise,
    SellerUndercut,
    SellerRaise,
}

#[derive(Debug, Clone)]
pub struct NashCheck {
    pub is_nash: bool,
    pub violated: Vec<NashCondition>,
}

/// Supremum of a unimodal payoff over `[0, x)`, using its known peak.
fn sup_below(f: impl Fn(f64) -> f64, peak: f64, x: f64) -> f64 {
    f(peak.min(x).max(0.0))
}

/// Supremum of a unimodal payoff over the open interval `(a, b)`.
fn sup_between(f: impl Fn(f64) -> f64, peak: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return f64::NEG_INFINITY;
    }
    f(peak.clamp(a, b))
}

/// Checks whether `(p_r, p_s)` is a Nash equilibrium, reporting every
/// violated deviation direction.
///
/// Deviations are evaluated analytically through the unimodal-payoff suprema
/// rather than by grid search. A price tie counts as an equilibrium when
/// assigning all demand to one fulfiller survives every deviation; interior
/// tie splits never do, so the split fraction `beta` plays no role here.
pub fn is_nash(params: &GameParams, p_r: f64, p_s: f64) -> Result<NashCheck, DemandError> {
    if !(0.0..=1.0).contains(&p_r) {
        return Err(DemandError::OutOfDomain(p_r));
    }
    if !(0.0..=1.0).contains(&p_s) {
        return Err(DemandError::OutOfDomain(p_s));
    }
    let kp = key_prices(params);
    let pi_rr = |p: f64| params.pi_rr(p).expect("price in domain");
    let pi_rs = |p: f64| params.pi_rs(p).expect("price in domain");
    let pi_ss = |p: f64| params.pi_ss(p).expect("price in domain");

    let mut violated = Vec::new();
    if p_r < p_s {
        // Retailer fulfills alone at p_r.
        let cur = pi_rr(p_r);
        if sup_below(pi_rr, kp.p_rstar, p_r) > cur + TOL {
            violated.push(NashCondition::RetailerUndercut);
        }
        let raise = sup_between(pi_rr, kp.p_rstar, p_r, p_s).max(pi_rs(p_s));
        if raise > cur + TOL {
            violated.push(NashCondition::RetailerRaise);
        }
        if sup_below(pi_ss, kp.p_sstar, p_r) > TOL {
            violated.push(NashCondition::SellerUndercut);
        }
        // Seller raising keeps its payoff at zero.
    } else if p_s < p_r {
        // Seller fulfills alone at p_s.
        let cur_s = pi_ss(p_s);
        if sup_below(pi_ss, kp.p_sstar, p_s) > cur_s + TOL {
            violated.push(NashCondition::SellerUndercut);
        }
        let raise = sup_between(pi_ss, kp.p_sstar, p_s, p_r).max(0.0);
        if raise > cur_s + TOL {
            violated.push(NashCondition::SellerRaise);
        }
        let cur_r = pi_rs(p_s);
        if sup_below(pi_rr, kp.p_rstar, p_s) > cur_r + TOL {
            violated.push(NashCondition::RetailerUndercut);
        }
        // Retailer raising keeps its payoff at pi_rs(p_s).
    } else {
        let p = p_r;
        // Seller-fulfills assignment.
        let mut seller_side = Vec::new();
        if sup_below(pi_rr, kp.p_rstar, p) > pi_rs(p) + TOL {
            seller_side.push(NashCondition::RetailerUndercut);
        }
        if sup_below(pi_ss, kp.p_sstar, p) > pi_ss(p) + TOL {
            seller_side.push(NashCondition::SellerUndercut);
        }
        if pi_ss(p) < -TOL {
            seller_side.push(NashCondition::SellerRaise);
        }
        // Retailer-fulfills assignment (the price window for this is empty
        // for every valid parameter set, but check it honestly).
        let mut retailer_side = Vec::new();
        if sup_below(pi_rr, kp.p_rstar, p) > pi_rr(p) + TOL {
            retailer_side.push(NashCondition::RetailerUndercut);
        }
        if pi_rs(p) > pi_rr(p) + TOL {
            retailer_side.push(NashCondition::RetailerRaise);
        }
        if sup_below(pi_ss, kp.p_sstar, p) > TOL {
            retailer_side.push(NashCondition::SellerUndercut);
        }
        if seller_side.is_empty() || retailer_side.is_empty() {
            return Ok(NashCheck { is_nash: true, violated: Vec::new() });
        }
        violated = seller_side;
    }
    Ok(NashCheck { is_nash: violated.is_empty(), violated })
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    fn nonempty(&self) -> bool {
        self.hi >= self.lo - TOL
    }

    fn clamped(self) -> Self {
        // Families narrower than tolerance collapse to points.
        if self.hi < self.lo {
            let mid = 0.5 * (self.lo + self.hi);
            Interval { lo: mid, hi: mid }
        } else {
            self
        }
    }

    fn intersect(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }
}

/// The unrefined Nash equilibrium families for one parameter set.
///
/// Families are constructed from the exact no-deviation conditions, which
/// reproduces the case tables over fee regimes including their closed
/// boundaries (a boundary fee belongs to both adjacent regimes).
pub fn nash_set(params: &GameParams) -> Vec<EquilibriumFamily> {
    let kp = key_prices(params);
    build_nash_set(params, &kp)
}

fn build_nash_set(params: &GameParams, kp: &KeyPrices) -> Vec<EquilibriumFamily> {
    let pi_rr = |p: f64| crate::payoff::pi_rr_at(&params.curve, params.c_r, p);
    let pi_rs = |p: f64| crate::payoff::pi_rs_at(&params.curve, params.alpha, p);

    let mut shared: Vec<Interval> = Vec::new();
    let first = Interval {
        lo: kp.p_sind,
        hi: kp.p_rind.min(kp.p_rstar).min(kp.p_sstar),
    };
    if first.nonempty() {
        shared.push(first.clamped());
    }
    if let Some(pd) = kp.p_dagger {
        let second = Interval {
            lo: kp.p_rstar.max(kp.p_sind),
            hi: pd.min(kp.p_sstar),
        };
        if second.nonempty() {
            shared.push(second.clamped());
        }
    }
    // The two shared branches abut whenever both are nonempty.
    if shared.len() == 2 && shared[1].lo <= shared[0].hi + TOL {
        shared = vec![Interval { lo: shared[0].lo, hi: shared[0].hi.max(shared[1].hi) }];
    }

    let mut families: Vec<EquilibriumFamily> = shared
        .into_iter()
        .map(|iv| EquilibriumFamily {
            variant: FamilyVariant::SharedSellerInterval { lo: iv.lo, hi: iv.hi },
            refinement_status: RefinementStatus::Unrefined,
        })
        .collect();

    // Seller fixed at its optimum: needs the retailer's best undercut to be
    // no better than collecting the fee at p_sstar.
    if kp.p_sstar < 1.0 - TOL {
        let best_undercut = pi_rr(kp.p_rstar.min(kp.p_sstar));
        if best_undercut <= pi_rs(kp.p_sstar) + TOL {
            families.push(EquilibriumFamily {
                variant: FamilyVariant::SellerFixedRetailerAbove {
                    p_s: kp.p_sstar,
                    retailer_lo: kp.p_sstar,
                    retailer_hi: 1.0,
                },
                refinement_status: RefinementStatus::Unrefined,
            });
        }
    }

    // Retailer fixed at its optimum: needs the seller unable to profit below
    // it (p_sind >= p_rstar) and the seller priced at or above p_dagger.
    if let Some(pd) = kp.p_dagger {
        if kp.p_sind >= kp.p_rstar - TOL {
            families.push(EquilibriumFamily {
                variant: FamilyVariant::RetailerFixedSellerAbove {
                    p_r: kp.p_rstar,
                    seller_lo: pd,
                    seller_hi: 1.0,
                },
                refinement_status: RefinementStatus::Unrefined,
            });
        }
    }
    families
}

/// The admissible equilibrium families: the Nash set intersected with each
/// player's undominated price interval.
///
/// The retailer's undominated prices span its indifference and optimal
/// prices (in either order); the seller's span breakeven to optimum. Once
/// the fee pushes the seller's breakeven price to 1, the seller's only
/// undominated price is 1 and the single admissible family is the retailer
/// at its optimum against a seller at 1.
pub fn admissible_set(params: &GameParams) -> Vec<EquilibriumFamily> {
    let kp = key_prices(params);
    build_admissible_set(params, &kp)
}

fn build_admissible_set(params: &GameParams, kp: &KeyPrices) -> Vec<EquilibriumFamily> {
    let retailer_adm = Interval {
        lo: kp.p_rind.min(kp.p_rstar),
        hi: kp.p_rind.max(kp.p_rstar).min(1.0),
    };
    let seller_adm = Interval { lo: kp.p_sind.min(1.0), hi: kp.p_sstar };

    let mut out = Vec::new();
    for fam in build_nash_set(params, kp) {
        match fam.variant {
            FamilyVariant::SharedSellerInterval { lo, hi } => {
                let iv = Interval { lo, hi }.intersect(&retailer_adm).intersect(&seller_adm);
                if iv.nonempty() {
                    let iv = iv.clamped();
                    out.push(EquilibriumFamily {
                        variant: FamilyVariant::SharedSellerInterval { lo: iv.lo, hi: iv.hi },
                        refinement_status: RefinementStatus::Admissible,
                    });
                }
            }
            FamilyVariant::SellerFixedRetailerAbove { p_s, retailer_lo, retailer_hi } => {
                if p_s < seller_adm.lo - TOL || p_s > seller_adm.hi + TOL {
                    continue;
                }
                let iv = Interval { lo: retailer_lo, hi: retailer_hi }.intersect(&retailer_adm);
                if iv.nonempty() {
                    let iv = iv.clamped();
                    out.push(EquilibriumFamily {
                        variant: FamilyVariant::SellerFixedRetailerAbove {
                            p_s,
                            retailer_lo: iv.lo,
                            retailer_hi: iv.hi,
                        },
                        refinement_status: RefinementStatus::Admissible,
                    });
                }
            }
            FamilyVariant::RetailerFixedSellerAbove { p_r, seller_lo, seller_hi } => {
                if p_r < retailer_adm.lo - TOL || p_r > retailer_adm.hi + TOL {
                    continue;
                }
                let iv = Interval { lo: seller_lo, hi: seller_hi }.intersect(&seller_adm);
                if iv.nonempty() {
                    let iv = iv.clamped();
                    out.push(EquilibriumFamily {
                        variant: FamilyVariant::RetailerFixedSellerAbove {
                            p_r,
                            seller_lo: iv.lo,
                            seller_hi: iv.hi,
                        },
                        refinement_status: RefinementStatus::Admissible,
                    });
                }
            }
        }
    }
    out
}

/// The refined equilibrium outcomes.
///
/// One admissible family can be Pareto dominated: the retailer fulfilling at
/// its optimum pays the retailer exactly what the shared equilibrium at
/// `p_dagger` does, while the seller strictly prefers the latter whenever it
/// clears breakeven. That family is removed; everything else collapses to
/// outcomes, merging intervals that touch.
pub fn refined_outcomes(params: &GameParams) -> Vec<Outcome> {
    let kp = key_prices(params);
    refined_outcomes_with(params, &kp)
}

pub(crate) fn refined_outcomes_with(params: &GameParams, kp: &KeyPrices) -> Vec<Outcome> {
    let dominated = match kp.p_dagger {
        Some(pd) => pd > kp.p_sind + TOL && pd <= kp.p_sstar + TOL,
        None => false,
    };
    let mut outcomes: Vec<Outcome> = Vec::new();
    for fam in build_admissible_set(params, kp) {
        let outcome = match fam.variant {
            FamilyVariant::SharedSellerInterval { lo, hi } => {
                Outcome { price_lo: lo, price_hi: hi, fulfiller: Fulfiller::Seller }
            }
            FamilyVariant::SellerFixedRetailerAbove { p_s, .. } => {
                Outcome { price_lo: p_s, price_hi: p_s, fulfiller: Fulfiller::Seller }
            }
            FamilyVariant::RetailerFixedSellerAbove { p_r, .. } => {
                if dominated {
                    continue;
                }
                Outcome { price_lo: p_r, price_hi: p_r, fulfiller: Fulfiller::Retailer }
            }
        };
        outcomes.push(outcome);
    }
    merge_outcomes(&mut outcomes);
    outcomes
}

fn merge_outcomes(outcomes: &mut Vec<Outcome>) {
    outcomes.sort_by(|a, b| {
        (a.fulfiller == Fulfiller::Retailer)
            .cmp(&(b.fulfiller == Fulfiller::Retailer))
            .then(a.price_lo.total_cmp(&b.price_lo))
    });
    let mut merged: Vec<Outcome> = Vec::new();
    for o in outcomes.drain(..) {
        match merged.last_mut() {
            Some(last)
                if last.fulfiller == o.fulfiller && o.price_lo <= last.price_hi + TOL =>
            {
                last.price_hi = last.price_hi.max(o.price_hi);
            }
            _ => merged.push(o),
        }
    }
    *outcomes = merged;
}

/// The continuum interval `[max(p_rstar, p_sind), min(p_sstar, p_dagger)]`
/// of seller-fulfilled outcome prices, when nonempty.
pub(crate) fn continuum_interval(kp: &KeyPrices) -> Option<(f64, f64)> {
    let pd = kp.p_dagger?;
    let lo = kp.p_rstar.max(kp.p_sind);
    let hi = kp.p_sstar.min(pd);
    (hi >= lo - TOL).then_some((lo, hi.max(lo)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandCurve;

    fn linear_params(c_r: f64, c_s: f64, alpha: f64) -> GameParams {
        GameParams::new(DemandCurve::linear(), c_r, c_s, alpha, 0.5).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn shared_interval_points_are_nash_at_low_fee() {
        // p_sind = 0.4/0.9, p_rind = 0.6/0.9.
        let g = linear_params(0.6, 0.4, 0.1);
        for p in [4.0 / 9.0, 0.5, 0.55, 0.6, 6.0 / 9.0] {
            let chk = is_nash(&g, p, p).unwrap();
            assert!(chk.is_nash, "({p},{p}) should be Nash: {:?}", chk.violated);
        }
    }

    #[test]
    fn below_breakeven_tie_fails_on_seller_raise() {
        let g = linear_params(0.6, 0.4, 0.1);
        let chk = is_nash(&g, 0.3, 0.3).unwrap();
        assert!(!chk.is_nash);
        assert!(chk.violated.contains(&NashCondition::SellerRaise));
    }

    #[test]
    fn retailer_optimum_with_seller_above_pdagger_is_nash() {
        let g = linear_params(0.6, 0.4, 0.55);
        // p_dagger = (1 + sqrt(1 - 0.16/0.55)) / 2.
        let pd = 0.5 * (1.0 + (1.0f64 - 0.16 / 0.55).sqrt());
        assert!(is_nash(&g, 0.8, pd + 0.01).unwrap().is_nash);
        assert!(is_nash(&g, 0.8, 1.0).unwrap().is_nash);
        let chk = is_nash(&g, 0.8, pd - 0.02).unwrap();
        assert!(!chk.is_nash);
        assert!(chk.violated.contains(&NashCondition::RetailerRaise));
    }

    #[test]
    fn tie_at_one_is_not_nash_for_small_fee() {
        let g = linear_params(0.6, 0.4, 0.1);
        assert!(!is_nash(&g, 1.0, 1.0).unwrap().is_nash);
    }

    #[test]
    fn nash_set_low_fee_is_one_shared_interval() {
        let g = linear_params(0.6, 0.4, 0.15);
        let fams = nash_set(&g);
        assert_eq!(fams.len(), 1);
        match fams[0].variant {
            FamilyVariant::SharedSellerInterval { lo, hi } => {
                assert!(close(lo, 0.4 / 0.85));
                assert!(close(hi, 0.6 / 0.85));
            }
            ref other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn nash_set_midrange_has_seller_fixed_family() {
        let g = linear_params(0.6, 0.4, 0.25);
        let fams = nash_set(&g);
        let p_sstar = 0.5 * (1.0 + 0.4 / 0.75);
        assert!(fams.iter().any(|f| matches!(
            f.variant,
            FamilyVariant::SellerFixedRetailerAbove { p_s, retailer_hi, .. }
                if close(p_s, p_sstar) && close(retailer_hi, 1.0)
        )));
        assert!(fams.iter().any(|f| matches!(
            f.variant,
            FamilyVariant::SharedSellerInterval { lo, hi }
                if close(lo, 0.4 / 0.75) && close(hi, p_sstar)
        )));
    }

    #[test]
    fn nash_set_high_fee_has_retailer_fixed_family() {
        // c_s = 0.5 > c_sstar = 0.45 and alpha above the retailer feasibility fee.
        let g = linear_params(0.6, 0.5, 0.45);
        let fams = nash_set(&g);
        assert_eq!(fams.len(), 1);
        match fams[0].variant {
            FamilyVariant::RetailerFixedSellerAbove { p_r, seller_lo, seller_hi } => {
                assert!(close(p_r, 0.8));
                let pd = 0.5 * (1.0 + (1.0f64 - 0.16 / 0.45).sqrt());
                assert!(close(seller_lo, pd));
                assert!(close(seller_hi, 1.0));
            }
            ref other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn sampled_family_points_pass_is_nash() {
        let cases = [
            (0.6, 0.4, 0.15),
            (0.6, 0.4, 0.25),
            (0.6, 0.4, 0.45),
            (0.6, 0.5, 0.4),
            (0.6, 0.55, 0.28),
            (0.8, 0.2, 0.6),
        ];
        for &(c_r, c_s, alpha) in &cases {
            let g = linear_params(c_r, c_s, alpha);
            for fam in nash_set(&g) {
                for k in 0..=100 {
                    let t = k as f64 / 100.0;
                    let (p_r, p_s) = match fam.variant {
                        FamilyVariant::SharedSellerInterval { lo, hi } => {
                            let p = lo + t * (hi - lo);
                            (p, p)
                        }
                        FamilyVariant::RetailerFixedSellerAbove { p_r, seller_lo, seller_hi } => {
                            (p_r, seller_lo + t * (seller_hi - seller_lo))
                        }
                        FamilyVariant::SellerFixedRetailerAbove {
                            p_s,
                            retailer_lo,
                            retailer_hi,
                        } => (retailer_lo + t * (retailer_hi - retailer_lo), p_s),
                    };
                    let chk = is_nash(&g, p_r.clamp(0.0, 1.0), p_s.clamp(0.0, 1.0)).unwrap();
                    assert!(
                        chk.is_nash,
                        "family point ({p_r},{p_s}) of {:?} at ({c_r},{c_s},{alpha}) \
                         violates {:?}",
                        fam.variant, chk.violated
                    );
                }
            }
        }
    }

    #[test]
    fn admissible_low_fee_collapses_to_indifference_point() {
        let g = linear_params(0.6, 0.4, 0.1);
        let fams = admissible_set(&g);
        assert_eq!(fams.len(), 1);
        match fams[0].variant {
            FamilyVariant::SharedSellerInterval { lo, hi } => {
                assert!(close(lo, 0.6 / 0.9));
                assert!(close(hi, 0.6 / 0.9));
            }
            ref other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn admissible_shared_interval_runs_from_retailer_optimum_to_pdagger() {
        // Here p_dagger < p_sstar, so the admissible set is the shared
        // interval [p_rstar, p_dagger] alone.
        let g = linear_params(0.6, 0.55, 0.28);
        let fams = admissible_set(&g);
        assert_eq!(fams.len(), 1);
        match fams[0].variant {
            FamilyVariant::SharedSellerInterval { lo, hi } => {
                assert!(close(lo, 0.8));
                let pd = 0.5 * (1.0 + (1.0f64 - 0.16 / 0.28).sqrt());
                assert!(close(hi, pd));
            }
            ref other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn admissible_high_fee_pins_seller_to_one() {
        let g = linear_params(0.6, 0.4, 0.65); // alpha >= 1 - c_s
        let fams = admissible_set(&g);
        assert_eq!(fams.len(), 1);
        match fams[0].variant {
            FamilyVariant::RetailerFixedSellerAbove { p_r, seller_lo, seller_hi } => {
                assert!(close(p_r, 0.8));
                assert!(close(seller_lo, 1.0));
                assert!(close(seller_hi, 1.0));
            }
            ref other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn refined_outcome_low_fee_is_seller_at_retailer_indifference() {
        let g = linear_params(0.6, 0.4, 0.15);
        let out = refined_outcomes(&g);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].fulfiller, Fulfiller::Seller);
        assert!(close(out[0].price_lo, 0.6 / 0.85));
        assert!(close(out[0].price_hi, 0.6 / 0.85));
    }

    #[test]
    fn refined_outcome_midrange_is_seller_optimum() {
        let g = linear_params(0.6, 0.4, 0.25);
        let out = refined_outcomes(&g);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].fulfiller, Fulfiller::Seller);
        let p_sstar = 0.5 * (1.0 + 0.4 / 0.75);
        assert!(close(out[0].price_lo, p_sstar));
        assert!(close(out[0].price_hi, p_sstar));
    }

    #[test]
    fn refined_outcome_continuum_has_expected_endpoints() {
        let g = linear_params(0.6, 0.4, 0.4);
        let out = refined_outcomes(&g);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].fulfiller, Fulfiller::Seller);
        // [max(p_rstar, p_sind), min(p_sstar, p_dagger)]: here p_sstar = 5/6
        // sits below p_dagger = (1 + sqrt(0.6)) / 2.
        let pd = 0.5 * (1.0 + 0.6f64.sqrt());
        let p_sstar = 5.0 / 6.0;
        assert!(p_sstar < pd);
        assert!(close(out[0].price_lo, 0.8));
        assert!(close(out[0].price_hi, p_sstar));
    }

    #[test]
    fn refined_outcome_high_fee_is_retailer_optimum() {
        for alpha in [0.58, 0.6, 0.8, 0.95] {
            let g = linear_params(0.6, 0.4, alpha);
            let out = refined_outcomes(&g);
            assert_eq!(out.len(), 1, "alpha = {alpha}: {out:?}");
            assert_eq!(out[0].fulfiller, Fulfiller::Retailer);
            assert!(close(out[0].price_lo, 0.8));
        }
    }

    #[test]
    fn boundary_fee_reports_both_adjacent_rows_or_their_merge() {
        // At the seller feasibility fee, the indifference point and the
        // seller optimum coincide: one merged seller outcome.
        let g = linear_params(0.6, 0.4, 0.2);
        let out = refined_outcomes(&g);
        assert_eq!(out.len(), 1);
        assert!(close(out[0].price_lo, 0.75));
        assert!(close(out[0].price_hi, 0.75));

        // At the fee where the retailer takes over, the continuum has shrunk
        // to its endpoint and the retailer row joins it.
        let fees = crate::fees::threshold_fees(&DemandCurve::linear(), 0.6, 0.4).unwrap();
        let g = linear_params(0.6, 0.4, fees.alpha_sdagger);
        let out = refined_outcomes(&g);
        assert_eq!(out.len(), 2, "{out:?}");
        assert!(out.iter().any(|o| o.fulfiller == Fulfiller::Seller));
        assert!(out.iter().any(|o| o.fulfiller == Fulfiller::Retailer && close(o.price_lo, 0.8)));
    }

    #[test]
    fn outcome_partition_changes_exactly_at_threshold_fees() {
        let curve = DemandCurve::linear();
        let (c_r, c_s) = (0.6, 0.4);
        let fees = crate::fees::threshold_fees(&curve, c_r, c_s).unwrap();
        let n = 1000;
        let mut boundaries = Vec::new();
        let label = |alpha: f64| -> u8 {
            let g = linear_params(c_r, c_s, alpha);
            let out = refined_outcomes(&g);
            let o = &out[0];
            if o.fulfiller == Fulfiller::Retailer {
                3
            } else if o.price_hi - o.price_lo > 1e-9 {
                2
            } else {
                let kp = key_prices(&g);
                if close(o.price_lo, kp.p_rind) {
                    0
                } else {
                    1
                }
            }
        };
        let mut prev = label(0.5 / n as f64);
        for k in 1..n {
            let alpha = (k as f64 + 0.5) / n as f64;
            let cur = label(alpha);
            if cur != prev {
                boundaries.push(alpha - 0.5 / n as f64);
                prev = cur;
            }
        }
        let expected = [fees.alpha_sstar, fees.alpha_opt, fees.alpha_sdagger];
        assert_eq!(boundaries.len(), expected.len(), "{boundaries:?}");
        for (b, e) in boundaries.iter().zip(expected) {
            assert!((b - e).abs() <= 1.0 / n as f64, "boundary {b} vs fee {e}");
        }
    }

    #[test]
    fn outcome_price_increases_with_fee_in_indifference_region() {
        let mut prev = 0.0;
        for k in 1..=10 {
            let alpha = 0.01 * k as f64; // all below min(alpha_sstar, alpha_rdagger)
            let g = linear_params(0.6, 0.4, alpha);
            let out = refined_outcomes(&g);
            assert!(out[0].price_lo > prev);
            prev = out[0].price_lo;
        }
    }

    #[test]
    fn no_shared_family_has_retailer_fulfiller() {
        // Structural: shared families always carry the seller.
        for &(c_r, c_s, alpha) in
            &[(0.6, 0.4, 0.1), (0.6, 0.4, 0.45), (0.7, 0.2, 0.3), (0.9, 0.1, 0.8)]
        {
            let g = linear_params(c_r, c_s, alpha);
            for fam in refined_outcomes(&g) {
                if fam.price_hi - fam.price_lo > 1e-9 {
                    assert_eq!(fam.fulfiller, Fulfiller::Seller);
                }
            }
        }
    }
}
