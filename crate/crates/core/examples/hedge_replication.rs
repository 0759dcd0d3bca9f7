//! Delta-hedged LP wealth with fees streamed at `f̂`, for finer and finer
//! rebalancing, and without any fees.

use cfm_lab::sim::{verify_hedge, verify_hedge_with, FeeStream, SimConfig};

fn main() -> cfm_lab::Result<()> {
    let cfg = SimConfig { gamma: 1.0, n_paths: 100, ..SimConfig::default() };
    let report = verify_hedge(&cfg, &[100, 1_000, 10_000])?;
    for row in &report.rows {
        println!("{:>6} steps: median |Z_T|/ψ0 = {:.3e}", row.n_steps, row.median_abs_ratio);
    }
    let unpaid = verify_hedge_with(&cfg, &[1_000], FeeStream::Zero)?;
    println!("no fees: Z_T < 0 on {:.0}% of paths", 100.0 * unpaid.rows[0].fraction_negative);
    Ok(())
}
