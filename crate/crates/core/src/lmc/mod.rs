//! The Langevin Monte Carlo iteration and the chain runners built on it.

mod adamw;
mod chain;
mod init;
mod step;

pub use adamw::{run_adamw, AdamWConfig};
pub use chain::{run_chain, run_chain_observed, run_ensemble, run_ensemble_sequential, LmcConfig, Record, StepView, Trajectory};
pub use init::{init_weights, init_weights_with, Init};
pub use step::{interpolate, lmc_step};
