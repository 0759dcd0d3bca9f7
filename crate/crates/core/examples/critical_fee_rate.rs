//! The critical fee rate `f̂` and the delta hedge across prices and weights.

use cfm_lab::pricing::{critical_fee_rate, delta_hedge_ratio, hat_f, psi_closed_form, MarketParams, ValuationRef};

fn main() -> cfm_lab::Result<()> {
    println!("f̂ for ψ = 200, σ = 0.2, θ = 0.5: {}", critical_fee_rate(200.0, 0.5, 0.2, 0.0));
    println!("with r = 0.05: {}", critical_fee_rate(200.0, 0.5, 0.2, 0.05));

    let params = MarketParams::new(10.0, 0.4)?;
    for theta in [0.2, 0.5, 0.8] {
        let reference = ValuationRef::new(200.0, 10.0, theta)?;
        println!("theta {theta}");
        for s in [5.0, 10.0, 20.0] {
            println!(
                "  S {s:>4}: ψ {:>9.4}  Δ {:>8.4}  f̂ {:>7.4}",
                psi_closed_form(&reference, s)?,
                delta_hedge_ratio(&reference, s)?,
                hat_f(&reference, s, &params)?
            );
        }
    }
    Ok(())
}
