//! Simulation laboratory for constant function markets.
//!
//! * [`pool`]: geometric mean market pool with closed-form swaps and a
//!   segregated fee ledger.
//! * [`pricing`]: pool valuation, the critical fee-income rate and the delta
//!   hedge of an LP position.
//! * [`agents`]: myopic arbitrageur and price-sensitive noise trader.
//! * [`sim`]: per-path event loop, grid sweeps and hedge replication.
//! * [`config`], [`report`], [`cli`]: plain-text configs, CSV/manifest output
//!   and the `simulate` / `sweep` / `verify` commands.
//! * [`verify`]: property suites run by `cfm-lab verify`.

pub mod agents;
pub mod cli;
pub mod config;
pub mod error;
pub mod optimize;
pub mod pool;
pub mod pricing;
pub mod report;
pub mod sim;
pub mod verify;

pub use error::{CfmError, Result};
pub use pool::{PoolState, Side, SwapMode, SwapQuote};
pub use sim::{Grid, SimConfig};
