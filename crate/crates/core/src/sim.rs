//! Agent-based Monte Carlo engine.
//!
//! Each step of a path advances the reference price along a driftless GBM,
//! lets the arbitrageur trade against the pool, then (with probability
//! `1 - e^{-λ dt}`) lets one noise trader arrive and route an order. Fees
//! collected by the pool are compared against the critical fee rate evaluated
//! on the pool marked at the reference price.
//!
//! Randomness for path `i` comes from a ChaCha8 stream keyed by
//! `(master_seed, i)` only, so the same path index sees identical draws in
//! every grid cell (common random numbers) and results do not depend on the
//! order in which paths are scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::agents::{noise_route, sample_arrival, solve_arbitrage, NoiseSide, NoiseTraderParams, Venue};
use crate::error::{CfmError, Result};
use crate::pool::PoolState;
use crate::pricing::{critical_fee_rate, hedged_wealth_step, psi_closed_form, psi_mark_to_market, ValuationRef};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub s0: f64,
    pub x1_0: f64,
    pub x2_0: f64,
    pub theta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub p: f64,
    pub size_std: f64,
    pub r: f64,
    pub horizon: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            s0: 10.0,
            x1_0: 100.0,
            x2_0: 10.0,
            theta: 0.5,
            gamma: 0.997,
            sigma: 0.4,
            lambda: 50.0,
            p: 0.9,
            size_std: 1.0,
            r: 0.0,
            horizon: 1.0,
            n_steps: 1000,
            n_paths: 100,
            master_seed: 42,
        }
    }
}

impl SimConfig {
    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Checks every parameter against its domain; the error names the key.
    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CfmError::config(key, format!("must be positive, got {v}")))
            }
        }
        fn non_negative(key: &str, v: f64) -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CfmError::config(key, format!("must be >= 0, got {v}")))
            }
        }
        positive("s0", self.s0)?;
        positive("x1_0", self.x1_0)?;
        positive("x2_0", self.x2_0)?;
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(CfmError::config("theta", format!("must lie in (0, 1), got {}", self.theta)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(CfmError::config("gamma", format!("must lie in (0, 1], got {}", self.gamma)));
        }
        non_negative("sigma", self.sigma)?;
        non_negative("lambda", self.lambda)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(CfmError::config("p", format!("must lie in [0, 1], got {}", self.p)));
        }
        non_negative("size_std", self.size_std)?;
        non_negative("r", self.r)?;
        positive("horizon", self.horizon)?;
        if self.n_steps == 0 {
            return Err(CfmError::config("n_steps", "must be >= 1"));
        }
        if self.n_paths == 0 {
            return Err(CfmError::config("n_paths", "must be >= 1"));
        }
        Ok(())
    }

    pub fn initial_pool(&self) -> Result<PoolState> {
        PoolState::new(self.x1_0, self.x2_0, self.theta, self.gamma)
    }

    /// Closed-form valuation anchored at the initial pool marked at `s0`.
    pub fn valuation_ref(&self) -> Result<ValuationRef> {
        ValuationRef::from_pool(&self.initial_pool()?, self.s0)
    }

    pub fn noise_params(&self) -> NoiseTraderParams {
        NoiseTraderParams {
            lambda: self.lambda,
            p: self.p,
            size_std: self.size_std,
        }
    }
}

/// Exact driftless GBM transition: `s · exp(-σ²dt/2 + σ√dt · z)`.
pub fn gbm_step(s: f64, sigma: f64, dt: f64, z: f64) -> f64 {
    s * (-0.5 * sigma * sigma * dt + sigma * dt.sqrt() * z).exp()
}

/// Random source for one path.
pub fn path_rng(master_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}

/// The four draws consumed by every step, whether or not they are used, so
/// that streams stay aligned across parameter cells.
#[derive(Debug, Clone, Copy)]
struct StepDraws {
    z: f64,
    u_arrival: f64,
    raw_size: f64,
    u_rational: f64,
}

impl StepDraws {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        StepDraws {
            z: rng.sample(StandardNormal),
            u_arrival: rng.random(),
            raw_size: rng.sample(StandardNormal),
            u_rational: rng.random(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEvent {
    pub venue: Venue,
    pub side: NoiseSide,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub s: f64,
    /// Pool marginal price at the end of the step.
    pub pool_price: f64,
    pub x1: f64,
    pub x2: f64,
    /// Fees collected this step, asset-2 fees converted at `s`.
    pub fee_income: f64,
    /// Critical fee rate times `dt`.
    pub hat_f: f64,
    pub arb_profit: f64,
    pub noise: Option<NoiseEvent>,
    /// Pool marginal price right after the arbitrageur acted.
    pub post_arb_price: f64,
    /// `x1 + s · x2` right after the arbitrageur acted.
    pub post_arb_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub path_index: u64,
    /// Accumulated pool fees `F`.
    pub fees: f64,
    /// Accumulated bound `F̂`.
    pub bound: f64,
    /// `F̂ - F`.
    pub diff: f64,
    pub arb_trades: usize,
    pub noise_arrivals: usize,
    pub final_pool: PoolState,
    pub steps: Option<Vec<StepRecord>>,
}

/// Runs one path and keeps the full step series.
pub fn run_path(config: &SimConfig, path_index: u64) -> Result<PathResult> {
    simulate_path(config, path_index, true)
}

pub fn simulate_path(config: &SimConfig, path_index: u64, record: bool) -> Result<PathResult> {
    config.validate()?;
    let dt = config.dt();
    let noise = config.noise_params();
    let mut rng = path_rng(config.master_seed, path_index);
    let mut pool = config.initial_pool()?;
    let mut s = config.s0;
    let mut fees = 0.0;
    let mut bound = 0.0;
    let mut arb_trades = 0;
    let mut noise_arrivals = 0;
    let mut steps = record.then(|| Vec::with_capacity(config.n_steps));

    for i in 1..=config.n_steps {
        let draws = StepDraws::sample(&mut rng);
        s = gbm_step(s, config.sigma, dt, draws.z);
        let (fees_1, fees_2) = (pool.fees_collected_1, pool.fees_collected_2);

        let arb = solve_arbitrage(&pool, s)?;
        let (after_arb, arb_profit) = arb.execute(&pool, s)?;
        pool = after_arb;
        if arb.is_trade() {
            arb_trades += 1;
        }
        let post_arb_price = pool.spot_price();
        let post_arb_value = psi_mark_to_market(&pool, s)?;

        let mut event = None;
        if sample_arrival(noise.lambda, dt, draws.u_arrival) {
            noise_arrivals += 1;
            let decision = noise_route(&pool, s, draws.raw_size, draws.u_rational, &noise)?;
            pool = decision.execute(&pool)?;
            event = Some(NoiseEvent {
                venue: decision.venue,
                side: decision.side,
                size: decision.size,
            });
        }

        let fee_income = (pool.fees_collected_1 - fees_1) + (pool.fees_collected_2 - fees_2) * s;
        let value = psi_mark_to_market(&pool, s)?;
        let hat_f = critical_fee_rate(value, config.theta, config.sigma, config.r) * dt;
        fees += fee_income;
        bound += hat_f;

        if let Some(steps) = steps.as_mut() {
            steps.push(StepRecord {
                t: i as f64 * dt,
                s,
                pool_price: pool.spot_price(),
                x1: pool.x1,
                x2: pool.x2,
                fee_income,
                hat_f,
                arb_profit,
                noise: event,
                post_arb_price,
                post_arb_value,
            });
        }
    }

    Ok(PathResult {
        path_index,
        fees,
        bound,
        diff: bound - fees,
        arb_trades,
        noise_arrivals,
        final_pool: pool,
        steps,
    })
}

/// Parameter grid for a sweep. Each axis is sorted ascending before use.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub gammas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Grid {
    /// γ ∈ {0.96, 0.965, …, 1.0}, σ ∈ {0.2, 0.4, 0.6, 0.8}, λ ∈ {50, 75, 100}.
    pub fn paper() -> Self {
        Grid {
            gammas: (0..9).map(|i| (960.0 + 5.0 * i as f64) / 1000.0).collect(),
            sigmas: vec![0.2, 0.4, 0.6, 0.8],
            lambdas: vec![50.0, 75.0, 100.0],
        }
    }

    /// Cells ordered by `(lambda, sigma, gamma)`.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v
        };
        let (gammas, sigmas, lambdas) = (sorted(&self.gammas), sorted(&self.sigmas), sorted(&self.lambdas));
        let mut cells = Vec::with_capacity(gammas.len() * sigmas.len() * lambdas.len());
        for &lambda in &lambdas {
            for &sigma in &sigmas {
                for &gamma in &gammas {
                    cells.push((gamma, sigma, lambda));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCell {
    pub gamma: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub mean_diff: f64,
    /// Sample standard deviation (`n - 1` denominator), zero for one path.
    pub std_diff: f64,
    pub n_paths: usize,
    pub mean_fees: f64,
    pub mean_bound: f64,
    pub mean_arb_trades: f64,
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn aggregate_cell(gamma: f64, sigma: f64, lambda: f64, paths: &[PathResult]) -> AggregateCell {
    let diffs: Vec<f64> = paths.iter().map(|p| p.diff).collect();
    let (mean_diff, std_diff) = mean_and_std(&diffs);
    let n = paths.len() as f64;
    AggregateCell {
        gamma,
        sigma,
        lambda,
        mean_diff,
        std_diff,
        n_paths: paths.len(),
        mean_fees: paths.iter().map(|p| p.fees).sum::<f64>() / n,
        mean_bound: paths.iter().map(|p| p.bound).sum::<f64>() / n,
        mean_arb_trades: paths.iter().map(|p| p.arb_trades as f64).sum::<f64>() / n,
    }
}

/// Runs `base.n_paths` paths for every grid cell and aggregates `F̂ - F`.
pub fn run_sweep(grid: &Grid, base: &SimConfig) -> Result<Vec<AggregateCell>> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(CfmError::config("grid", "gamma, sigma and lambda lists must be non-empty"));
    }
    let configs: Vec<SimConfig> = cells
        .iter()
        .map(|&(gamma, sigma, lambda)| SimConfig {
            gamma,
            sigma,
            lambda,
            ..base.clone()
        })
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    let n_paths = base.n_paths;
    let results: Vec<PathResult> = (0..configs.len() * n_paths)
        .into_par_iter()
        .map(|job| simulate_path(&configs[job / n_paths], (job % n_paths) as u64, false))
        .collect::<Result<_>>()?;

    Ok(cells
        .iter()
        .zip(results.chunks(n_paths))
        .map(|(&(gamma, sigma, lambda), paths)| aggregate_cell(gamma, sigma, lambda, paths))
        .collect())
}

/// What the hedged LP receives as fee income in [`verify_hedge_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeeStream {
    /// `f̂ · dt` evaluated at the start of each step.
    CriticalRate,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeRow {
    pub n_steps: usize,
    /// Median over paths of `|Z_T| / ψ(S0)`.
    pub median_abs_ratio: f64,
    /// Fraction of paths ending with `Z_T < 0`.
    pub fraction_negative: f64,
    pub terminal_wealth: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeReport {
    pub psi0: f64,
    pub rows: Vec<HedgeRow>,
}

impl HedgeReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].median_abs_ratio < w[0].median_abs_ratio)
    }
}

/// Delta-hedged LP wealth with fees streamed at the critical rate.
pub fn verify_hedge(config: &SimConfig, step_counts: &[usize]) -> Result<HedgeReport> {
    verify_hedge_with(config, step_counts, FeeStream::CriticalRate)
}

/// Simulates the wealth `Z` of an LP who borrows `ψ(S0)`, holds the pool
/// (valued in closed form), shorts `(1-θ)ψ/S` of asset 2 rebalanced every
/// step, and receives `stream`, over `config.n_paths` GBM paths per step count.
pub fn verify_hedge_with(config: &SimConfig, step_counts: &[usize], stream: FeeStream) -> Result<HedgeReport> {
    config.validate()?;
    if config.gamma != 1.0 {
        return Err(CfmError::config("gamma", "hedge verification runs in the fee-free regime (gamma = 1)"));
    }
    if config.r != 0.0 {
        return Err(CfmError::config("r", "hedge verification assumes r = 0"));
    }
    let reference = config.valuation_ref()?;
    let mut rows = Vec::with_capacity(step_counts.len());
    for &n_steps in step_counts {
        if n_steps == 0 {
            return Err(CfmError::config("n_steps", "step counts must be >= 1"));
        }
        let dt = config.horizon / n_steps as f64;
        let terminal_wealth: Vec<f64> = (0..config.n_paths as u64)
            .into_par_iter()
            .map(|path| {
                let mut rng = path_rng(config.master_seed, path);
                let mut s = config.s0;
                let mut z = 0.0;
                for _ in 0..n_steps {
                    let shock: f64 = rng.sample(StandardNormal);
                    let next = gbm_step(s, config.sigma, dt, shock);
                    let fee = match stream {
                        FeeStream::CriticalRate => {
                            critical_fee_rate(psi_closed_form(&reference, s)?, reference.theta, config.sigma, config.r) * dt
                        }
                        FeeStream::Zero => 0.0,
                    };
                    z = hedged_wealth_step(z, s, next, &reference, fee, config.r, dt)?;
                    s = next;
                }
                Ok(z)
            })
            .collect::<Result<_>>()?;
        let mut ratios: Vec<f64> = terminal_wealth.iter().map(|z| z.abs() / reference.psi0).collect();
        let negative = terminal_wealth.iter().filter(|&&z| z < 0.0).count();
        rows.push(HedgeRow {
            n_steps,
            median_abs_ratio: median(&mut ratios),
            fraction_negative: negative as f64 / terminal_wealth.len() as f64,
            terminal_wealth,
        });
    }
    Ok(HedgeReport {
        psi0: reference.psi0,
        rows,
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    }
}

/// Terminal prices of `n_paths` standalone GBM paths.
pub fn gbm_terminal_samples(s0: f64, sigma: f64, horizon: f64, n_steps: usize, n_paths: usize, seed: u64) -> Vec<f64> {
    let dt = horizon / n_steps as f64;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(seed, path);
            (0..n_steps).fold(s0, |s, _| gbm_step(s, sigma, dt, rng.sample(StandardNormal)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gbm_step_examples() {
        assert_eq!(gbm_step(10.0, 0.0, 0.001, 1.7), 10.0);
        let up = gbm_step(10.0, 0.4, 0.001, 1.0);
        assert_relative_eq!(up, 10.0 * (0.4 * 0.001f64.sqrt() - 0.00008).exp(), max_relative = 1e-15);
        assert_relative_eq!(up, 10.12648, epsilon = 1e-5);
        assert_relative_eq!(gbm_step(10.0, 0.4, 0.001, 0.0), 10.0 * (-0.00008f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(gbm_step(10.0, 0.4, 0.001, 0.0), 9.9992, epsilon = 1e-4);
    }

    #[test]
    fn dead_market() {
        let cfg = SimConfig { sigma: 0.0, lambda: 0.0, n_steps: 200, ..SimConfig::default() };
        let res = run_path(&cfg, 0).unwrap();
        assert_eq!((res.fees, res.bound, res.diff), (0.0, 0.0, 0.0));
        assert_eq!(res.arb_trades, 0);
        assert_eq!(res.noise_arrivals, 0);
    }

    #[test]
    fn fee_free_pool_earns_nothing() {
        let cfg = SimConfig { gamma: 1.0, lambda: 0.0, n_steps: 300, ..SimConfig::default() };
        for path in 0..5 {
            let res = run_path(&cfg, path).unwrap();
            assert_eq!(res.fees, 0.0);
            assert!(res.bound > 0.0);
            assert!(res.diff > 0.0);
        }
    }

    #[test]
    fn run_path_is_deterministic() {
        let cfg = SimConfig { gamma: 0.97, n_steps: 400, ..SimConfig::default() };
        assert_eq!(run_path(&cfg, 3).unwrap(), run_path(&cfg, 3).unwrap());
        assert_ne!(run_path(&cfg, 3).unwrap().diff, run_path(&cfg, 4).unwrap().diff);
    }

    #[test]
    fn accounting_closes() {
        let cfg = SimConfig { gamma: 0.98, lambda: 100.0, p: 0.5, n_steps: 500, ..SimConfig::default() };
        let res = run_path(&cfg, 1).unwrap();
        let steps = res.steps.as_ref().unwrap();
        let fees: f64 = steps.iter().map(|s| s.fee_income).sum();
        let bound: f64 = steps.iter().map(|s| s.hat_f).sum();
        assert!((fees - res.fees).abs() <= 1e-10);
        assert!((bound - res.bound).abs() <= 1e-10);
        assert_eq!(res.diff, res.bound - res.fees);
        assert!(steps.iter().all(|s| s.fee_income >= 0.0 && s.hat_f >= 0.0));
        assert!(res.fees > 0.0);
    }

    #[test]
    fn invalid_config_rejected_before_running() {
        let cfg = SimConfig { sigma: -0.1, ..SimConfig::default() };
        match run_path(&cfg, 0) {
            Err(CfmError::Config { key, .. }) => assert_eq!(key, "sigma"),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = SimConfig { n_steps: 0, ..SimConfig::default() };
        assert!(matches!(run_path(&cfg, 0), Err(CfmError::Config { .. })));
    }

    #[test]
    fn aggregation_conventions() {
        assert_eq!(mean_and_std(&[5.0]), (5.0, 0.0));
        let (m, s) = mean_and_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_relative_eq!(s, 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn singleton_sweep_matches_path() {
        let base = SimConfig { n_paths: 1, n_steps: 200, ..SimConfig::default() };
        let grid = Grid { gammas: vec![0.98], sigmas: vec![0.4], lambdas: vec![50.0] };
        let cells = run_sweep(&grid, &base).unwrap();
        assert_eq!(cells.len(), 1);
        let path = run_path(&SimConfig { gamma: 0.98, sigma: 0.4, lambda: 50.0, ..base }, 0).unwrap();
        assert_eq!(cells[0].mean_diff, path.diff);
        assert_eq!(cells[0].std_diff, 0.0);
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = Grid { gammas: vec![], sigmas: vec![0.4], lambdas: vec![50.0] };
        assert!(matches!(run_sweep(&grid, &SimConfig::default()), Err(CfmError::Config { .. })));
    }

    #[test]
    fn paper_grid_shape_and_order() {
        let cells = Grid::paper().cells();
        assert_eq!(cells.len(), 108);
        assert_relative_eq!(cells[0].0, 0.96);
        assert_relative_eq!(cells[8].0, 1.0);
        for w in cells.windows(2) {
            let key = |c: &(f64, f64, f64)| (c.2, c.1, c.0);
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn hedge_static_market() {
        let cfg = SimConfig { gamma: 1.0, sigma: 0.0, n_paths: 4, ..SimConfig::default() };
        let report = verify_hedge(&cfg, &[10, 100]).unwrap();
        for row in &report.rows {
            assert!(row.terminal_wealth.iter().all(|&z| z == 0.0));
        }
    }

    #[test]
    fn hedge_requires_fee_free_pool() {
        let cfg = SimConfig { gamma: 0.99, ..SimConfig::default() };
        assert!(verify_hedge(&cfg, &[10]).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
