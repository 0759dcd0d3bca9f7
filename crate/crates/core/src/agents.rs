//! Market participants: a myopic arbitrageur between the pool and a
//! frictionless reference market, and a price-sensitive noise trader.
//!
//! All randomness is passed in as arguments, so every decision here is a
//! pure function of its inputs.

use crate::error::{CfmError, Result};
use crate::optimize::golden_section_max;
use crate::pool::{PoolState, Side, SwapMode, SwapQuote};

/// Relative price gap below which the arbitrageur does not trade. Keeps a
/// pool sitting exactly on the edge of the no-trade band from being pushed
/// by rounding noise.
pub const GAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArbAction {
    None,
    Trade {
        quote: SwapQuote,
        /// Signed amount of asset 2 traded on the reference market at `s`:
        /// positive is a purchase, negative a sale.
        reference_leg: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArbDecision {
    pub action: ArbAction,
    /// Numeraire profit of the round trip, `>= 0`.
    pub expected_profit: f64,
}

impl ArbDecision {
    pub fn none() -> Self {
        ArbDecision {
            action: ArbAction::None,
            expected_profit: 0.0,
        }
    }

    pub fn is_trade(&self) -> bool {
        matches!(self.action, ArbAction::Trade { .. })
    }

    /// Executes the pool leg and settles the reference leg at `s`. Returns the
    /// new pool and the realised profit, measured from the asset flows.
    pub fn execute(&self, pool: &PoolState, s: f64) -> Result<(PoolState, f64)> {
        let (quote, reference_leg) = match self.action {
            ArbAction::None => return Ok((*pool, 0.0)),
            ArbAction::Trade {
                quote,
                reference_leg,
            } => (quote, reference_leg),
        };
        let next = pool.apply_swap(&quote)?;
        // What the arbitrageur paid into the pool (reserves plus fee ledger)
        // and took out of it.
        let paid_1 = (next.x1 - pool.x1).max(0.0) + (next.fees_collected_1 - pool.fees_collected_1);
        let paid_2 = (next.x2 - pool.x2).max(0.0) + (next.fees_collected_2 - pool.fees_collected_2);
        let got_1 = (pool.x1 - next.x1).max(0.0);
        let got_2 = (pool.x2 - next.x2).max(0.0);
        // Residual asset-2 position (zero up to rounding), marked at `s`.
        let net_2 = got_2 - paid_2 + reference_leg;
        let realised = got_1 - paid_1 - reference_leg * s + net_2 * s;
        Ok((next, realised))
    }
}

/// Profit-maximising one-shot arbitrage against a reference price `s`.
///
/// Buying asset 2 from the pool pays off while `spot · c < s`, with
/// `c = 2 - γ` the cost of a unit deposit including the fee. The optimal
/// trade leaves the pool's marginal price at `s / c`:
///
/// ```text
/// x1' = x1 · (s / (c · spot))^(1-θ)
/// ```
///
/// Symmetrically, selling asset 2 into the pool pays off while
/// `spot > s · c` and stops at marginal price `s · c`:
///
/// ```text
/// x2' = x2 · (spot / (s · c))^θ
/// ```
///
/// For `θ = 1/2` the first reduces to `x1' = √(s · x1 · x2 / c)`.
pub fn solve_arbitrage(pool: &PoolState, s: f64) -> Result<ArbDecision> {
    check_price(s)?;
    pool.invariant()?;
    let spot = pool.spot_price();
    let c = pool.fee_multiplier();
    let theta = pool.theta;

    let candidate = if spot * c < s * (1.0 - GAP_TOLERANCE) {
        let new_x1 = pool.x1 * (s / (c * spot)).powf(1.0 - theta);
        let quote = pool.quote_swap(Side::BuyAsset2, new_x1 - pool.x1, SwapMode::ExactIn)?;
        let profit = s * quote.amount_out - quote.total_in();
        Some((quote, -quote.amount_out, profit))
    } else if spot > s * c * (1.0 + GAP_TOLERANCE) {
        let new_x2 = pool.x2 * (spot / (s * c)).powf(theta);
        let quote = pool.quote_swap(Side::BuyAsset1, new_x2 - pool.x2, SwapMode::ExactIn)?;
        let profit = quote.amount_out - s * quote.total_in();
        Some((quote, quote.total_in(), profit))
    } else {
        None
    };

    Ok(match candidate {
        Some((quote, reference_leg, profit)) if profit > 0.0 => ArbDecision {
            action: ArbAction::Trade {
                quote,
                reference_leg,
            },
            expected_profit: profit,
        },
        _ => ArbDecision::none(),
    })
}

/// Round-trip profit of depositing `deposit` of the input asset on `side`
/// and closing the position on the reference market at `s`.
pub fn arbitrage_profit(pool: &PoolState, s: f64, side: Side, deposit: f64) -> Result<f64> {
    let quote = pool.quote_swap(side, deposit, SwapMode::ExactIn)?;
    Ok(match side {
        Side::BuyAsset2 => s * quote.amount_out - quote.total_in(),
        Side::BuyAsset1 => quote.amount_out - s * quote.total_in(),
    })
}

/// Largest deposit that could possibly be profitable on `side`: the trader
/// cannot receive more than the whole output reserve.
pub fn deposit_upper_bound(pool: &PoolState, s: f64, side: Side) -> f64 {
    let c = pool.fee_multiplier();
    match side {
        Side::BuyAsset2 => s * pool.x2 / c,
        Side::BuyAsset1 => pool.x1 / (s * c),
    }
}

/// Arbitrage by numerical search: golden-section maximisation of the
/// round-trip profit over the deposit in each direction. Works for any
/// concave trading function and serves as a cross-check on
/// [`solve_arbitrage`].
pub fn solve_arbitrage_numeric(pool: &PoolState, s: f64) -> Result<ArbDecision> {
    check_price(s)?;
    pool.invariant()?;
    let mut best = ArbDecision::none();
    for side in [Side::BuyAsset2, Side::BuyAsset1] {
        let upper = deposit_upper_bound(pool, s, side);
        let found = golden_section_max(
            |d| arbitrage_profit(pool, s, side, d).unwrap_or(f64::NEG_INFINITY),
            0.0,
            upper,
            upper * 1e-15,
            400,
        );
        if found.value > best.expected_profit {
            let quote = pool.quote_swap(side, found.x, SwapMode::ExactIn)?;
            let reference_leg = match side {
                Side::BuyAsset2 => -quote.amount_out,
                Side::BuyAsset1 => quote.total_in(),
            };
            best = ArbDecision {
                action: ArbAction::Trade {
                    quote,
                    reference_leg,
                },
                expected_profit: found.value,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTraderParams {
    /// Arrival intensity, per unit time.
    pub lambda: f64,
    /// Probability of choosing the venue with the better execution price.
    pub p: f64,
    /// Standard deviation of the trade size, in numeraire.
    pub size_std: f64,
}

impl Default for NoiseTraderParams {
    fn default() -> Self {
        NoiseTraderParams {
            lambda: 50.0,
            p: 0.9,
            size_std: 1.0,
        }
    }
}

impl NoiseTraderParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(CfmError::domain(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(CfmError::domain(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if !(self.size_std >= 0.0) || !self.size_std.is_finite() {
            return Err(CfmError::domain(format!(
                "size_std must be >= 0, got {}",
                self.size_std
            )));
        }
        Ok(())
    }
}

/// Probability of at least one Poisson arrival within a step of length `dt`.
pub fn arrival_probability(lambda: f64, dt: f64) -> f64 {
    if dt <= 0.0 || lambda <= 0.0 {
        return 0.0;
    }
    -(-lambda * dt).exp_m1()
}

pub fn sample_arrival(lambda: f64, dt: f64, u: f64) -> bool {
    u < arrival_probability(lambda, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Venue {
    Cfm,
    Reference,
}

impl Venue {
    pub fn as_str(&self) -> &'static str {
        match self {
            Venue::Cfm => "cfm",
            Venue::Reference => "reference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSide {
    BuyAsset2,
    SellAsset2,
}

impl NoiseSide {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseSide::BuyAsset2 => "buy",
            NoiseSide::SellAsset2 => "sell",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDecision {
    pub venue: Venue,
    pub side: NoiseSide,
    /// Numeraire spent (buy) or received (sell).
    pub size: f64,
    /// Pool leg, present when routed to the pool.
    pub quote: Option<SwapQuote>,
}

impl NoiseDecision {
    pub fn execute(&self, pool: &PoolState) -> Result<PoolState> {
        match (self.venue, &self.quote) {
            (Venue::Cfm, Some(quote)) => pool.apply_swap(quote),
            _ => Ok(*pool),
        }
    }
}

/// Pool leg and all-in price (numeraire per unit of asset 2, slippage and fee
/// included) for a noise trade of `size` numeraire.
pub fn cfm_execution(pool: &PoolState, side: NoiseSide, size: f64) -> Result<(SwapQuote, f64)> {
    match side {
        NoiseSide::BuyAsset2 => {
            // deposit plus fee equals the numeraire budget
            let deposit = size / pool.fee_multiplier();
            let quote = pool.quote_swap(Side::BuyAsset2, deposit, SwapMode::ExactIn)?;
            Ok((quote, size / quote.amount_out))
        }
        NoiseSide::SellAsset2 => {
            let quote = pool.quote_swap(Side::BuyAsset1, size, SwapMode::ExactOut)?;
            Ok((quote, size / quote.total_in()))
        }
    }
}

/// Routes a noise trade. `raw_size` is a standard normal draw whose sign gives
/// the direction; with probability `p` (`u_rational < p`) the trader picks
/// the venue with the better all-in price, otherwise the other one. Ties go
/// to the reference market, and trades the pool cannot fill are forced there.
pub fn noise_route(
    pool: &PoolState,
    s: f64,
    raw_size: f64,
    u_rational: f64,
    params: &NoiseTraderParams,
) -> Result<NoiseDecision> {
    check_price(s)?;
    let side = if raw_size > 0.0 {
        NoiseSide::BuyAsset2
    } else {
        NoiseSide::SellAsset2
    };
    let size = raw_size.abs() * params.size_std;
    let reference = NoiseDecision {
        venue: Venue::Reference,
        side,
        size,
        quote: None,
    };
    if size == 0.0 {
        return Ok(reference);
    }
    let (quote, cfm_price) = match cfm_execution(pool, side, size) {
        Ok(found) => found,
        Err(CfmError::Infeasible { .. }) => return Ok(reference),
        Err(err) => return Err(err),
    };
    let cfm_better = match side {
        NoiseSide::BuyAsset2 => cfm_price < s,
        NoiseSide::SellAsset2 => cfm_price > s,
    };
    let rational = u_rational < params.p;
    if cfm_better == rational {
        Ok(NoiseDecision {
            venue: Venue::Cfm,
            side,
            size,
            quote: Some(quote),
        })
    } else {
        Ok(reference)
    }
}

fn check_price(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(CfmError::domain(format!("price must be positive and finite, got {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pool(x1: f64, x2: f64, theta: f64, gamma: f64) -> PoolState {
        PoolState::new(x1, x2, theta, gamma).unwrap()
    }

    fn trade_of(decision: &ArbDecision) -> (SwapQuote, f64) {
        match decision.action {
            ArbAction::Trade {
                quote,
                reference_leg,
            } => (quote, reference_leg),
            ArbAction::None => panic!("expected a trade"),
        }
    }

    #[test]
    fn fee_free_arbitrage_closes_gap() {
        // x1' = √(1000 · 12.1) = 110
        let p = pool(100.0, 10.0, 0.5, 1.0);
        let d = solve_arbitrage(&p, 12.1).unwrap();
        let (quote, leg) = trade_of(&d);
        assert_eq!(quote.side, Side::BuyAsset2);
        assert_relative_eq!(quote.amount_in, 10.0, max_relative = 1e-12);
        assert_relative_eq!(quote.amount_out, 10.0 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(leg, -10.0 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(d.expected_profit, 1.0, max_relative = 1e-10);
        let (next, realised) = d.execute(&p, 12.1).unwrap();
        assert_relative_eq!(next.spot_price(), 12.1, max_relative = 1e-12);
        assert_relative_eq!(realised, d.expected_profit, max_relative = 1e-10);
    }

    #[test]
    fn no_gap_no_trade() {
        let p = pool(100.0, 10.0, 0.5, 0.96);
        assert_eq!(solve_arbitrage(&p, 10.0).unwrap(), ArbDecision::none());
        // inside the band on both sides
        assert!(!solve_arbitrage(&p, 10.39).unwrap().is_trade());
        assert!(!solve_arbitrage(&p, 9.62).unwrap().is_trade());
    }

    #[test]
    fn fee_band_example() {
        let p = pool(100.0, 10.0, 0.5, 0.96);
        let d = solve_arbitrage(&p, 10.5).unwrap();
        let (quote, _) = trade_of(&d);
        let new_x1 = (10.5f64 * 1000.0 / 1.04).sqrt();
        assert_relative_eq!(quote.amount_in, new_x1 - 100.0, max_relative = 1e-10);
        assert_relative_eq!(quote.amount_in, 0.4796, epsilon = 1e-4);
        assert_relative_eq!(quote.amount_out, 0.04773, epsilon = 1e-5);
        // brute-force grid over [0, 1] with 10^6 steps gives 0.00239236
        assert_relative_eq!(d.expected_profit, 0.0023923582, max_relative = 1e-8);
        let numeric = solve_arbitrage_numeric(&p, 10.5).unwrap();
        assert!((numeric.expected_profit - d.expected_profit).abs() <= 1e-6 * d.expected_profit);
    }

    #[test]
    fn sell_direction() {
        // pool overpriced relative to the reference market
        let p = pool(100.0, 10.0, 0.5, 0.99);
        let d = solve_arbitrage(&p, 8.0).unwrap();
        let (quote, leg) = trade_of(&d);
        assert_eq!(quote.side, Side::BuyAsset1);
        assert_relative_eq!(leg, quote.total_in());
        let (next, realised) = d.execute(&p, 8.0).unwrap();
        assert_relative_eq!(next.spot_price(), 8.0 * 1.01, max_relative = 1e-12);
        assert_relative_eq!(realised, d.expected_profit, max_relative = 1e-10);
    }

    #[test]
    fn general_weight_matches_numeric() {
        for (theta, gamma, s) in [(0.25, 0.97, 40.0), (0.25, 0.97, 20.0), (0.7, 1.0, 3.0), (0.8, 0.99, 1.0)] {
            let p = pool(100.0, 10.0, theta, gamma);
            let closed = solve_arbitrage(&p, s).unwrap();
            let numeric = solve_arbitrage_numeric(&p, s).unwrap();
            assert!(closed.is_trade());
            assert!((closed.expected_profit - numeric.expected_profit).abs() <= 1e-8 * closed.expected_profit);
            assert!(closed.expected_profit >= numeric.expected_profit * (1.0 - 1e-12));
        }
    }

    #[test]
    fn arbitrage_rejects_bad_price() {
        let p = pool(100.0, 10.0, 0.5, 1.0);
        assert!(solve_arbitrage(&p, 0.0).is_err());
        assert!(solve_arbitrage(&p, f64::NAN).is_err());
    }

    #[test]
    fn arrival_examples() {
        assert_relative_eq!(arrival_probability(50.0, 0.001), 0.048771, epsilon = 1e-6);
        assert_relative_eq!(arrival_probability(50.0, 0.001), 1.0 - (-0.05f64).exp(), max_relative = 1e-14);
        let q = arrival_probability(50.0, 0.001);
        assert!(sample_arrival(50.0, 0.001, q * 0.999));
        assert!(!sample_arrival(50.0, 0.001, q));
        assert!(!sample_arrival(50.0, 0.001, 0.9));
        assert_eq!(arrival_probability(50.0, 0.0), 0.0);
        assert!(!sample_arrival(50.0, 0.0, 0.0));
    }

    #[test]
    fn routing_prefers_reference_when_pool_is_worse() {
        // x2 out = 10 - 1000/101, all-in price 10.1
        let p = pool(100.0, 10.0, 0.5, 1.0);
        let params = NoiseTraderParams { lambda: 50.0, p: 0.9, size_std: 1.0 };
        let (quote, price) = cfm_execution(&p, NoiseSide::BuyAsset2, 1.0).unwrap();
        assert_relative_eq!(quote.amount_out, 10.0 - 1000.0 / 101.0, max_relative = 1e-12);
        assert_relative_eq!(price, 10.1, max_relative = 1e-12);
        let rational = noise_route(&p, 10.0, 1.0, 0.5, &params).unwrap();
        assert_eq!(rational.venue, Venue::Reference);
        assert_eq!(rational.side, NoiseSide::BuyAsset2);
        let irrational = noise_route(&p, 10.0, 1.0, 0.95, &params).unwrap();
        assert_eq!(irrational.venue, Venue::Cfm);
    }

    #[test]
    fn routing_prefers_cheap_pool() {
        // x2 out = 1000/90 - 1000/91, all-in price ≈ 8.19
        let p = pool(90.0, 100.0 / 9.0, 0.5, 1.0);
        let params = NoiseTraderParams::default();
        let (quote, price) = cfm_execution(&p, NoiseSide::BuyAsset2, 1.0).unwrap();
        assert_relative_eq!(quote.amount_out, 1000.0 / 90.0 - 1000.0 / 91.0, max_relative = 1e-12);
        assert_relative_eq!(price, 8.19, epsilon = 1e-3);
        let d = noise_route(&p, 10.0, 1.0, 0.1, &params).unwrap();
        assert_eq!(d.venue, Venue::Cfm);
        let next = d.execute(&p).unwrap();
        assert_relative_eq!(next.x1, 91.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_size_is_noop() {
        let p = pool(100.0, 10.0, 0.5, 0.99);
        let d = noise_route(&p, 10.0, 0.0, 0.0, &NoiseTraderParams::default()).unwrap();
        assert_eq!(d.size, 0.0);
        assert_eq!(d.venue, Venue::Reference);
        assert_eq!(d.execute(&p).unwrap(), p);
    }

    #[test]
    fn oversized_sell_forced_to_reference() {
        let p = pool(100.0, 10.0, 0.5, 0.99);
        // irrational draw would otherwise choose the pool
        let params = NoiseTraderParams { lambda: 50.0, p: 0.0, size_std: 1.0 };
        let d = noise_route(&p, 10.0, -99.5, 0.5, &params).unwrap();
        assert_eq!(d.side, NoiseSide::SellAsset2);
        assert_eq!(d.venue, Venue::Reference);
    }

    #[test]
    fn tie_goes_to_reference() {
        // a sell whose all-in price is exactly the reference price is not "better"
        let p = pool(100.0, 10.0, 0.5, 1.0);
        let (_, price) = cfm_execution(&p, NoiseSide::SellAsset2, 1.0).unwrap();
        let params = NoiseTraderParams { lambda: 1.0, p: 1.0, size_std: 1.0 };
        let d = noise_route(&p, price, -1.0, 0.0, &params).unwrap();
        assert_eq!(d.venue, Venue::Reference);
    }

    #[test]
    fn rationality_frequency() {
        let p = pool(100.0, 10.0, 0.5, 0.997);
        let params = NoiseTraderParams { lambda: 50.0, p: 0.9, size_std: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let cheaper = (0..n)
            .filter(|_| {
                let d = noise_route(&p, 10.0, 1.0, rng.random::<f64>(), &params).unwrap();
                d.venue == Venue::Reference
            })
            .count();
        let frac = cheaper as f64 / n as f64;
        let sd = (0.9f64 * 0.1 / n as f64).sqrt();
        assert!((frac - 0.9).abs() <= 3.0 * sd, "fraction {frac}");
    }

    fn arb_instance() -> impl Strategy<Value = (PoolState, f64)> {
        (1.0..1e3f64, 1.0..1e3f64, 0.1..0.9f64, 0.9..=1.0f64, -0.5..0.5f64).prop_map(
            |(x1, x2, theta, gamma, log_gap)| {
                let p = pool(x1, x2, theta, gamma);
                let s = p.spot_price() * log_gap.exp();
                (p, s)
            },
        )
    }

    proptest! {
        #[test]
        fn arbitrage_is_self_financing_and_idempotent((p, s) in arb_instance()) {
            let d = solve_arbitrage(&p, s).unwrap();
            prop_assert!(d.expected_profit >= 0.0);
            prop_assert_eq!(d.is_trade(), d.expected_profit > 0.0);
            let (next, realised) = d.execute(&p, s).unwrap();
            prop_assert!((realised - d.expected_profit).abs() <= 1e-10 * d.expected_profit.max(1.0));
            prop_assert!(!solve_arbitrage(&next, s).unwrap().is_trade());
            let c = p.fee_multiplier();
            let spot = next.spot_price();
            prop_assert!(spot >= s / c * (1.0 - 1e-11) && spot <= s * c * (1.0 + 1e-11));
            if p.gamma == 1.0 && d.is_trade() {
                prop_assert!((spot - s).abs() / s <= 1e-9);
            }
        }
    }
}
