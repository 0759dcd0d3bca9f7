//! Property suites behind `cfm-lab verify`. Each suite reports what it
//! measured next to the tolerance it was held to.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agents::solve_arbitrage;
use crate::error::Result;
use crate::pool::{PoolState, Side, SwapMode, SwapQuote};
use crate::pricing::psi_closed_form;
use crate::sim::{gbm_terminal_samples, mean_and_std, run_path, verify_hedge, verify_hedge_with, FeeStream, SimConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteOutcome {
    pub fn line(&self) -> String {
        format!("[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub invariant_trials: usize,
    pub arb_instances: usize,
    pub arb_grid_points: usize,
    pub identity_paths: usize,
    pub hedge_paths: usize,
    pub hedge_step_counts: Vec<usize>,
    pub gbm_paths: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 2024,
            invariant_trials: 10_000,
            arb_instances: 1_000,
            arb_grid_points: 1_000_000,
            identity_paths: 5,
            hedge_paths: 100,
            hedge_step_counts: vec![100, 1_000, 10_000],
            gbm_paths: 10_000,
        }
    }
}

impl VerifyOptions {
    /// Reduced sizes for smoke runs.
    pub fn quick() -> Self {
        VerifyOptions {
            invariant_trials: 500,
            arb_instances: 40,
            arb_grid_points: 20_000,
            identity_paths: 1,
            hedge_paths: 40,
            hedge_step_counts: vec![50, 500, 5_000],
            gbm_paths: 4_000,
            ..VerifyOptions::default()
        }
    }
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        invariant_suite(opts, |pool, quote| pool.apply_swap(quote)),
        arbitrage_oracle_suite(opts)?,
        valuation_identity_suite(opts)?,
        hedge_suite(opts)?,
        gbm_suite(opts),
    ])
}

/// Random swaps executed with `apply`; passes when `Ψ` never drifts by more
/// than `1e-12` relative and every execution succeeds.
pub fn invariant_suite<F>(opts: &VerifyOptions, apply: F) -> SuiteOutcome
where
    F: Fn(&PoolState, &SwapQuote) -> Result<PoolState>,
{
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..opts.invariant_trials {
        let pool = PoolState::new(
            rng.random_range(1.0..1e4),
            rng.random_range(1.0..1e4),
            rng.random_range(0.1..0.9),
            rng.random_range(0.9..=1.0),
        )
        .expect("valid pool");
        let side = if rng.random::<bool>() { Side::BuyAsset2 } else { Side::BuyAsset1 };
        let (mode, amount) = if rng.random::<bool>() {
            let reserve_in = match side {
                Side::BuyAsset2 => pool.x1,
                Side::BuyAsset1 => pool.x2,
            };
            (SwapMode::ExactIn, rng.random_range(0.0..0.9) * reserve_in)
        } else {
            (SwapMode::ExactOut, rng.random_range(0.0..0.95) * pool.reserve_of_output(side))
        };
        let outcome = pool
            .quote_swap(side, amount, mode)
            .and_then(|q| apply(&pool, &q))
            .and_then(|next| Ok((pool.invariant()?, next.invariant()?)));
        match outcome {
            Ok((before, after)) => worst = worst.max((after - before).abs() / before),
            Err(_) => failures += 1,
        }
    }
    SuiteOutcome {
        name: "invariant preservation",
        passed: failures == 0 && worst <= TOL,
        detail: format!(
            "{} swaps, max relative drift {worst:.3e} (tol {TOL:e}), {failures} rejected",
            opts.invariant_trials
        ),
    }
}

/// Instance for the arbitrage oracle.
#[derive(Debug, Clone, Copy)]
pub struct ArbInstance {
    pub pool: PoolState,
    pub s: f64,
}

pub fn random_arb_instances(n: usize, seed: u64) -> Vec<ArbInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let gamma = if i % 10 == 0 { 1.0 } else { rng.random_range(0.95..1.0) };
            let pool = PoolState::new(
                rng.random_range(10.0..1000.0),
                rng.random_range(1.0..100.0),
                rng.random_range(0.1..0.9),
                gamma,
            )
            .expect("valid pool");
            let s = pool.spot_price() * rng.random_range(-0.1f64..0.1).exp();
            ArbInstance { pool, s }
        })
        .collect()
}

/// Best round-trip profit over a log-spaced grid of deposits in
/// `[1e-12·U, U]` for both directions. Withdrawals come straight from
/// `x1^θ x2^(1-θ) = const`, written with `ln_1p`/`expm1` so that tiny
/// deposits do not pick up cancellation noise. Returns 0 when no grid point
/// is profitable.
pub fn grid_search_profit(pool: &PoolState, s: f64, points: usize) -> f64 {
    let theta = pool.theta;
    let c = 2.0 - pool.gamma;
    // deposit asset 1, sell withdrawn asset 2 at s
    let buy2 = |d: f64| {
        let out = -pool.x2 * (-(theta / (1.0 - theta)) * (d / pool.x1).ln_1p()).exp_m1();
        s * out - c * d
    };
    // buy asset 2 at s, deposit it, keep withdrawn asset 1
    let buy1 = |d: f64| {
        let out = -pool.x1 * (-((1.0 - theta) / theta) * (d / pool.x2).ln_1p()).exp_m1();
        out - s * c * d
    };
    let span = 12.0;
    let mut best: f64 = 0.0;
    for (upper, profit) in [(s * pool.x2 / c, &buy2 as &dyn Fn(f64) -> f64), (pool.x1 / (s * c), &buy1)] {
        for i in 0..points {
            let frac = if points > 1 { i as f64 / (points - 1) as f64 } else { 1.0 };
            let d = upper * 10f64.powf(-span * (1.0 - frac));
            best = best.max(profit(d));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub max_relative_gap: f64,
    pub decision_mismatches: usize,
    pub traded: usize,
    pub instances: usize,
}

pub fn compare_with_oracle(instances: &[ArbInstance], points: usize) -> Result<OracleComparison> {
    let rows: Vec<(f64, f64)> = instances
        .par_iter()
        .map(|inst| Ok((solve_arbitrage(&inst.pool, inst.s)?.expected_profit, grid_search_profit(&inst.pool, inst.s, points))))
        .collect::<Result<_>>()?;
    let mut max_relative_gap: f64 = 0.0;
    let mut decision_mismatches = 0;
    let mut traded = 0;
    for (solver, oracle) in rows {
        if (solver > 0.0) != (oracle > 0.0) {
            decision_mismatches += 1;
            continue;
        }
        if solver > 0.0 {
            traded += 1;
            max_relative_gap = max_relative_gap.max((solver - oracle).abs() / oracle);
        }
    }
    Ok(OracleComparison {
        max_relative_gap,
        decision_mismatches,
        traded,
        instances: instances.len(),
    })
}

pub fn arbitrage_oracle_suite(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    const TOL: f64 = 1e-6;
    let instances = random_arb_instances(opts.arb_instances, opts.seed);
    let cmp = compare_with_oracle(&instances, opts.arb_grid_points)?;
    Ok(SuiteOutcome {
        name: "arbitrage oracle equivalence",
        passed: cmp.decision_mismatches == 0 && cmp.max_relative_gap <= TOL,
        detail: format!(
            "{} instances ({} trades), max relative profit gap {:.3e} (tol {TOL:e}), {} no-trade disagreements",
            cmp.instances, cmp.traded, cmp.max_relative_gap, cmp.decision_mismatches
        ),
    })
}

/// Largest relative gap between the reserve-marked pool value after each
/// arbitrage and the closed form `ψ(S0)(S/S0)^(1-θ)` along one fee-free path.
pub fn valuation_identity_gap(config: &SimConfig, path_index: u64) -> Result<f64> {
    let reference = config.valuation_ref()?;
    let result = run_path(config, path_index)?;
    let mut worst: f64 = 0.0;
    for step in result.steps.as_deref().unwrap_or_default() {
        let closed = psi_closed_form(&reference, step.s)?;
        worst = worst.max((step.post_arb_value - closed).abs() / closed);
    }
    Ok(worst)
}

pub fn valuation_identity_suite(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    const TOL: f64 = 1e-8;
    let mut worst: f64 = 0.0;
    for theta in [0.5, 0.3] {
        let config = SimConfig {
            gamma: 1.0,
            theta,
            x1_0: 100.0,
            x2_0: 10.0 * (1.0 - theta) / theta,
            master_seed: opts.seed,
            ..SimConfig::default()
        };
        for path in 0..opts.identity_paths as u64 {
            worst = worst.max(valuation_identity_gap(&config, path)?);
        }
    }
    Ok(SuiteOutcome {
        name: "closed-form pool value identity",
        passed: worst <= TOL,
        detail: format!("max relative gap {worst:.3e} over gamma = 1 paths (tol {TOL:e})"),
    })
}

pub fn hedge_suite(opts: &VerifyOptions) -> Result<SuiteOutcome> {
    const FINAL_TOL: f64 = 0.01;
    const NEGATIVE_SHARE: f64 = 0.95;
    let config = SimConfig {
        gamma: 1.0,
        sigma: 0.4,
        n_paths: opts.hedge_paths,
        master_seed: opts.seed,
        ..SimConfig::default()
    };
    let report = verify_hedge(&config, &opts.hedge_step_counts)?;
    let unpaid = verify_hedge_with(&config, &[1_000], FeeStream::Zero)?;
    let medians: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{}: {:.3e}", r.n_steps, r.median_abs_ratio))
        .collect();
    let last = report.rows.last().map_or(f64::NAN, |r| r.median_abs_ratio);
    let negative = unpaid.rows[0].fraction_negative;
    Ok(SuiteOutcome {
        name: "hedge replication",
        passed: report.strictly_decreasing() && last < FINAL_TOL && negative >= NEGATIVE_SHARE,
        detail: format!(
            "median |Z_T|/psi0 by steps [{}] (final tol {FINAL_TOL}), zero-fee share Z_T < 0: {negative:.2} (min {NEGATIVE_SHARE})",
            medians.join(", ")
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmCalibration {
    pub mean_terminal: f64,
    pub standard_error: f64,
    pub log_variance: f64,
    pub target_log_variance: f64,
}

pub fn gbm_calibration(s0: f64, sigma: f64, horizon: f64, n_steps: usize, n_paths: usize, seed: u64) -> GbmCalibration {
    let terminal = gbm_terminal_samples(s0, sigma, horizon, n_steps, n_paths, seed);
    let (mean, std) = mean_and_std(&terminal);
    let logs: Vec<f64> = terminal.iter().map(|s| (s / s0).ln()).collect();
    let (_, log_std) = mean_and_std(&logs);
    GbmCalibration {
        mean_terminal: mean,
        standard_error: std / (n_paths as f64).sqrt(),
        log_variance: log_std * log_std,
        target_log_variance: sigma * sigma * horizon,
    }
}

pub fn gbm_suite(opts: &VerifyOptions) -> SuiteOutcome {
    let (s0, sigma) = (10.0, 0.4);
    let cal = gbm_calibration(s0, sigma, 1.0, 250, opts.gbm_paths, opts.seed);
    let z = (cal.mean_terminal - s0).abs() / cal.standard_error;
    let var_gap = (cal.log_variance - cal.target_log_variance).abs() / cal.target_log_variance;
    SuiteOutcome {
        name: "GBM martingale",
        passed: z <= 3.0 && var_gap <= 0.05,
        detail: format!(
            "{} paths, mean S_T {:.5} ({z:.2} s.e. from S0, max 3), var ln(S_T/S0) off by {:.2}% (max 5%)",
            opts.gbm_paths,
            cal.mean_terminal,
            100.0 * var_gap
        ),
    }
}
