//! The arbitrageur's optimal trade against a reference price, closed form next
//! to the numerical search.

use cfm_lab::agents::{solve_arbitrage, solve_arbitrage_numeric};
use cfm_lab::PoolState;

fn main() -> cfm_lab::Result<()> {
    for (theta, gamma, s) in [(0.5, 0.997, 10.5), (0.5, 0.997, 10.01), (0.3, 0.99, 9.6), (0.5, 1.0, 12.0)] {
        let x2 = 10.0 * (1.0 - theta) / theta;
        let pool = PoolState::new(100.0, x2, theta, gamma)?;
        let closed = solve_arbitrage(&pool, s)?;
        let numeric = solve_arbitrage_numeric(&pool, s)?;
        print!("theta {theta}, gamma {gamma}, S {s}: ");
        if !closed.is_trade() {
            println!("no trade (numeric profit {:.3e})", numeric.expected_profit);
            continue;
        }
        let (next, realised) = closed.execute(&pool, s)?;
        println!(
            "profit {:.10} (numeric {:.10}), pool price {:.6} -> {:.6}",
            realised,
            numeric.expected_profit,
            pool.spot_price(),
            next.spot_price()
        );
    }
    Ok(())
}
