//! One path at a high and a low fee: fee income against the bound and the
//! number of arbitrage trades.

use cfm_lab::sim::{run_path, SimConfig};

fn main() -> cfm_lab::Result<()> {
    for gamma in [0.96, 0.997] {
        let cfg = SimConfig { gamma, ..SimConfig::default() };
        let path = run_path(&cfg, 0)?;
        let steps = path.steps.as_deref().unwrap_or_default();
        let last = steps.last().expect("at least one step");
        println!(
            "gamma {gamma}: F = {:.4}, F̂ = {:.4}, F̂ - F = {:.4}, {} arbitrage trades, {} noise orders, final S {:.4} vs pool {:.4}",
            path.fees, path.bound, path.diff, path.arb_trades, path.noise_arrivals, last.s, last.pool_price
        );
    }
    Ok(())
}
