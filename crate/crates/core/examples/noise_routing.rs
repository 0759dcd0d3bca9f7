//! Noise traders choosing between the pool and the reference market.

use cfm_lab::agents::{noise_route, NoiseTraderParams};
use cfm_lab::PoolState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> cfm_lab::Result<()> {
    let pool = PoolState::new(100.0, 10.0, 0.5, 0.997)?;
    let params = NoiseTraderParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut to_pool = 0;
    let n = 10_000;
    for i in 0..n {
        let raw: f64 = rng.sample(StandardNormal);
        let decision = noise_route(&pool, 10.02, raw, rng.random(), &params)?;
        if i < 5 {
            println!("{} {:.4} via {}", decision.side.as_str(), decision.size, decision.venue.as_str());
        }
        if decision.quote.is_some() {
            to_pool += 1;
        }
    }
    println!("{to_pool}/{n} orders went to the pool (p = {})", params.p);
    Ok(())
}
