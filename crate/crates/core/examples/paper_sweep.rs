//! Full (γ, σ, λ) grid: 9 × 4 × 3 cells, 100 paths each, T = 1, 1000 steps.
//! Prints mean and standard deviation of the fee shortfall `F̂ - F` per cell.
//!
//! ```bash
//! cargo run --release -p cfm-lab --example paper_sweep
//! ```

use std::time::Instant;

use cfm_lab::sim::{run_sweep, Grid, SimConfig};

fn main() -> cfm_lab::Result<()> {
    let started = Instant::now();
    let cells = run_sweep(&Grid::paper(), &SimConfig::default())?;
    println!("{:>6} {:>5} {:>6} {:>10} {:>10} {:>10} {:>10} {:>8}", "gamma", "sigma", "lambda", "mean F̂-F", "std", "mean F", "mean F̂", "arbs");
    for c in &cells {
        println!(
            "{:>6.3} {:>5.1} {:>6.0} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.1}",
            c.gamma, c.sigma, c.lambda, c.mean_diff, c.std_diff, c.mean_fees, c.mean_bound, c.mean_arb_trades
        );
    }
    let positive = cells.iter().filter(|c| c.mean_diff > 0.0).count();
    println!("{positive}/{} cells with positive mean shortfall ({:.1?})", cells.len(), started.elapsed());
    Ok(())
}
