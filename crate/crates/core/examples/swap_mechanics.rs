//! Quoting and executing swaps on a geometric mean pool.

use cfm_lab::{PoolState, Side, SwapMode};

fn main() -> cfm_lab::Result<()> {
    let pool = PoolState::new(100.0, 10.0, 0.5, 0.997)?;
    println!("pool x1 = {}, x2 = {}, spot = {}, Ψ = {}", pool.x1, pool.x2, pool.spot_price(), pool.invariant()?);

    let quote = pool.quote_swap(Side::BuyAsset2, 10.0, SwapMode::ExactIn)?;
    println!(
        "deposit {} of asset 1 (+{:.4} fee) -> {:.6} of asset 2",
        quote.amount_in, quote.fee, quote.amount_out
    );
    let after = pool.apply_swap(&quote)?;
    println!("after: x1 = {}, x2 = {:.6}, spot = {:.6}, fees held = {}", after.x1, after.x2, after.spot_price(), after.fees_collected_1);

    let back = after.quote_swap(Side::BuyAsset1, quote.amount_in, SwapMode::ExactOut)?;
    println!("withdrawing {} of asset 1 again costs {:.6} of asset 2", back.amount_out, back.total_in());

    match pool.quote_swap(Side::BuyAsset2, 9.95, SwapMode::ExactOut) {
        Ok(_) => println!("unexpected quote"),
        Err(err) => println!("exact-out of 99.5% of the reserve: {err}"),
    }
    Ok(())
}
