//! Pool valuation, the arbitrage-free bound on fee income and the delta hedge
//! for one risky asset (asset 2) priced in the numeraire (asset 1).
//!
//! For a pool with `Ψ = x1^θ · x2^(1-θ)` held at the no-arbitrage price, the
//! value share of the risky asset is `1 - θ`, so
//!
//! ```text
//! ψ(S)      = ψ(S0) · (S / S0)^(1-θ)
//! S · ψ'(S) = (1-θ) · ψ(S)
//! S² · ψ''  = -θ(1-θ) · ψ(S)
//! f̂         = θ(1-θ)/2 · σ² · ψ(S) - r · (1-θ) · ψ(S)
//! ```
//!
//! At `θ = 1/2` both exponents coincide.

use crate::error::{CfmError, Result};
use crate::pool::PoolState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub s0: f64,
    pub sigma: f64,
    pub mu: f64,
    pub r: f64,
}

impl MarketParams {
    pub fn new(s0: f64, sigma: f64) -> Result<Self> {
        let params = MarketParams {
            s0,
            sigma,
            mu: 0.0,
            r: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_rate(mut self, r: f64) -> Result<Self> {
        self.r = r;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_price(self.s0)?;
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(CfmError::domain(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(CfmError::domain(format!("r must be >= 0, got {}", self.r)));
        }
        if !self.mu.is_finite() {
            return Err(CfmError::domain("mu must be finite"));
        }
        Ok(())
    }
}

/// Reference point for the closed-form pool value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationRef {
    pub psi0: f64,
    pub s0: f64,
    pub theta: f64,
}

impl ValuationRef {
    pub fn new(psi0: f64, s0: f64, theta: f64) -> Result<Self> {
        if !(psi0 > 0.0) || !psi0.is_finite() {
            return Err(CfmError::domain(format!("psi0 must be positive, got {psi0}")));
        }
        check_price(s0)?;
        if !(theta > 0.0 && theta < 1.0) {
            return Err(CfmError::domain(format!("theta must lie in (0, 1), got {theta}")));
        }
        Ok(ValuationRef { psi0, s0, theta })
    }

    /// Anchors the valuation at a pool marked to market at `s0`.
    pub fn from_pool(pool: &PoolState, s0: f64) -> Result<Self> {
        ValuationRef::new(psi_mark_to_market(pool, s0)?, s0, pool.theta)
    }

    /// Value share of the risky asset, `1 - θ`.
    pub fn risky_weight(&self) -> f64 {
        1.0 - self.theta
    }
}

/// `ψ(S) = ψ0 · (S / S0)^(1-θ)`.
pub fn psi_closed_form(reference: &ValuationRef, s: f64) -> Result<f64> {
    check_price(s)?;
    Ok(reference.psi0 * (s / reference.s0).powf(reference.risky_weight()))
}

/// `x1 + S · x2`.
pub fn psi_mark_to_market(pool: &PoolState, s: f64) -> Result<f64> {
    check_price(s)?;
    if !(pool.x1 > 0.0 && pool.x2 > 0.0) {
        return Err(CfmError::domain("pool reserves must be positive"));
    }
    Ok(pool.x1 + s * pool.x2)
}

/// Critical fee-income rate for a pool worth `psi` numeraire.
pub fn critical_fee_rate(psi: f64, theta: f64, sigma: f64, r: f64) -> f64 {
    let convexity = 0.5 * theta * (1.0 - theta) * sigma * sigma * psi;
    convexity - r * (1.0 - theta) * psi
}

/// Critical fee-income rate `f̂` at price `s`, with `ψ` from the closed form.
pub fn hat_f(reference: &ValuationRef, s: f64, params: &MarketParams) -> Result<f64> {
    let psi = psi_closed_form(reference, s)?;
    Ok(critical_fee_rate(psi, reference.theta, params.sigma, params.r))
}

/// Units of asset 2 held short to neutralise the pool's first-order exposure:
/// `-∂ψ/∂S = -(1-θ) · ψ(S) / S`.
pub fn delta_hedge_ratio(reference: &ValuationRef, s: f64) -> Result<f64> {
    let psi = psi_closed_form(reference, s)?;
    Ok(-reference.risky_weight() * psi / s)
}

/// One step of the hedged LP wealth process. The hedge is set at `s_prev`
/// and held over the step; uninvested cash accrues at `r`.
pub fn hedged_wealth_step(
    z: f64,
    s_prev: f64,
    s_next: f64,
    reference: &ValuationRef,
    fee_income: f64,
    r: f64,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(CfmError::domain(format!("dt must be positive, got {dt}")));
    }
    let delta = delta_hedge_ratio(reference, s_prev)?;
    let pool_gain = psi_closed_form(reference, s_next)? - psi_closed_form(reference, s_prev)?;
    let hedge_gain = delta * (s_next - s_prev);
    let interest = (z - delta * s_prev) * r * dt;
    Ok(z + pool_gain + hedge_gain + interest + fee_income)
}

fn check_price(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(CfmError::domain(format!("price must be positive and finite, got {s}")))
    }
}
