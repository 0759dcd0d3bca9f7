//! Geometric mean market pool: reserves, the trading function
//! `Ψ(x1, x2) = x1^θ · x2^(1-θ)`, closed-form swap quoting and fee accounting.
//!
//! Asset 1 is the numeraire. Fees are charged on the input asset at rate
//! `1 - γ`, paid on top of the deposit, and kept in a ledger outside the
//! reserves, so executed swaps leave `Ψ` unchanged.

use crate::error::{CfmError, Result};

/// Relative tolerance on `Ψ` when applying a quote.
pub const INVARIANT_TOLERANCE: f64 = 1e-12;

/// Exact-out requests at or above this fraction of the output reserve are rejected.
pub const FEASIBILITY_CAP: f64 = 0.99;

/// Direction of a swap, named by the asset the trader receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Deposit asset 1 (numeraire), withdraw asset 2.
    BuyAsset2,
    /// Deposit asset 2, withdraw asset 1.
    BuyAsset1,
}

/// Which leg of the trade the caller fixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapMode {
    ExactIn,
    ExactOut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapQuote {
    pub side: Side,
    /// Deposit into the pool, in units of the input asset.
    pub amount_in: f64,
    /// Withdrawal from the pool, in units of the output asset.
    pub amount_out: f64,
    /// `(1 - γ) · amount_in`, in units of the input asset, paid on top of the deposit.
    pub fee: f64,
}

impl SwapQuote {
    pub fn zero(side: Side) -> Self {
        SwapQuote {
            side,
            amount_in: 0.0,
            amount_out: 0.0,
            fee: 0.0,
        }
    }

    /// Total the trader hands over: deposit plus fee.
    pub fn total_in(&self) -> f64 {
        self.amount_in + self.fee
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolState {
    pub x1: f64,
    pub x2: f64,
    pub theta: f64,
    pub gamma: f64,
    pub fees_collected_1: f64,
    pub fees_collected_2: f64,
}

impl PoolState {
    pub fn new(x1: f64, x2: f64, theta: f64, gamma: f64) -> Result<Self> {
        check_positive("x1", x1)?;
        check_positive("x2", x2)?;
        if !(theta > 0.0 && theta < 1.0) {
            return Err(CfmError::domain(format!("theta must lie in (0, 1), got {theta}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(CfmError::domain(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        Ok(PoolState {
            x1,
            x2,
            theta,
            gamma,
            fees_collected_1: 0.0,
            fees_collected_2: 0.0,
        })
    }

    /// `Ψ(x1, x2) = x1^θ · x2^(1-θ)`.
    pub fn invariant(&self) -> Result<f64> {
        check_positive("x1", self.x1)?;
        check_positive("x2", self.x2)?;
        Ok(self.x1.powf(self.theta) * self.x2.powf(1.0 - self.theta))
    }

    /// Marginal price of asset 2 in units of asset 1: `(1-θ)·x1 / (θ·x2)`.
    pub fn spot_price(&self) -> f64 {
        (1.0 - self.theta) * self.x1 / (self.theta * self.x2)
    }

    /// Cost of one unit deposited, fee included: `2 - γ`.
    pub fn fee_multiplier(&self) -> f64 {
        1.0 + (1.0 - self.gamma)
    }

    pub fn reserve_of_output(&self, side: Side) -> f64 {
        match side {
            Side::BuyAsset2 => self.x2,
            Side::BuyAsset1 => self.x1,
        }
    }

    /// Reserve of the output asset after the input reserve moves to `new_in`,
    /// keeping `Ψ` fixed.
    fn output_reserve_after(&self, side: Side, new_in: f64) -> f64 {
        let theta = self.theta;
        match side {
            // x2' = x2 · (x1 / x1')^(θ / (1-θ))
            Side::BuyAsset2 => self.x2 * (self.x1 / new_in).powf(theta / (1.0 - theta)),
            // x1' = x1 · (x2 / x2')^((1-θ) / θ)
            Side::BuyAsset1 => self.x1 * (self.x2 / new_in).powf((1.0 - theta) / theta),
        }
    }

    /// Reserve of the input asset needed once the output reserve drops to `new_out`.
    fn input_reserve_for(&self, side: Side, new_out: f64) -> f64 {
        let theta = self.theta;
        match side {
            Side::BuyAsset2 => self.x1 * (self.x2 / new_out).powf((1.0 - theta) / theta),
            Side::BuyAsset1 => self.x2 * (self.x1 / new_out).powf(theta / (1.0 - theta)),
        }
    }

    fn reserves_in_out(&self, side: Side) -> (f64, f64) {
        match side {
            Side::BuyAsset2 => (self.x1, self.x2),
            Side::BuyAsset1 => (self.x2, self.x1),
        }
    }

    /// Quote a swap. `amount` is in units of the input asset for
    /// [`SwapMode::ExactIn`] and of the output asset for [`SwapMode::ExactOut`].
    pub fn quote_swap(&self, side: Side, amount: f64, mode: SwapMode) -> Result<SwapQuote> {
        if !(amount >= 0.0) || !amount.is_finite() {
            return Err(CfmError::domain(format!(
                "trade amount must be finite and non-negative, got {amount}"
            )));
        }
        if amount == 0.0 {
            return Ok(SwapQuote::zero(side));
        }
        let (reserve_in, reserve_out) = self.reserves_in_out(side);
        let (amount_in, amount_out) = match mode {
            SwapMode::ExactIn => {
                let new_out = self.output_reserve_after(side, reserve_in + amount);
                (amount, reserve_out - new_out)
            }
            SwapMode::ExactOut => {
                if amount >= FEASIBILITY_CAP * reserve_out {
                    return Err(CfmError::Infeasible {
                        requested: amount,
                        reserve: reserve_out,
                    });
                }
                let new_in = self.input_reserve_for(side, reserve_out - amount);
                (new_in - reserve_in, amount)
            }
        };
        Ok(SwapQuote {
            side,
            amount_in,
            amount_out,
            fee: (1.0 - self.gamma) * amount_in,
        })
    }

    /// Execute a quote produced against this pool. The fee goes to the ledger
    /// of the input asset; reserves move by exactly `amount_in` / `amount_out`.
    pub fn apply_swap(&self, quote: &SwapQuote) -> Result<PoolState> {
        let finite = quote.amount_in.is_finite() && quote.amount_out.is_finite();
        if !finite || quote.amount_in < 0.0 || quote.amount_out < 0.0 {
            return Err(CfmError::domain("quote amounts must be finite and non-negative"));
        }
        if quote.fee != (1.0 - self.gamma) * quote.amount_in {
            return Err(CfmError::domain(
                "quote fee does not match this pool's fee parameter",
            ));
        }
        let mut next = *self;
        match quote.side {
            Side::BuyAsset2 => {
                next.x1 += quote.amount_in;
                next.x2 -= quote.amount_out;
                next.fees_collected_1 += quote.fee;
            }
            Side::BuyAsset1 => {
                next.x2 += quote.amount_in;
                next.x1 -= quote.amount_out;
                next.fees_collected_2 += quote.fee;
            }
        }
        if !(next.x1 > 0.0 && next.x2 > 0.0) {
            return Err(CfmError::Infeasible {
                requested: quote.amount_out,
                reserve: self.reserve_of_output(quote.side),
            });
        }
        let before = self.invariant()?;
        let after = next.invariant()?;
        let drift = (after - before).abs() / before;
        if drift > INVARIANT_TOLERANCE {
            return Err(CfmError::StaleQuote {
                relative_drift: drift,
            });
        }
        Ok(next)
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CfmError::domain(format!("{name} must be positive and finite, got {value}")))
    }
}
