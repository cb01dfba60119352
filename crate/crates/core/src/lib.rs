//! Transmission policies for an energy-harvesting device whose battery loses
//! part of the harvested energy depending on its charge, and whose charge is
//! only observed through a coarse partition.
//!
//! - [`model`]: storage efficiency, intra-frame charging, quantized battery
//!   update, harvest statistics, rewards and device consumption.
//! - [`chain`]: the Markov chain induced by a policy, its long-run reward
//!   and a Monte Carlo cross-check.
//! - [`optimize`]: perfect-knowledge optimum (relative value iteration),
//!   exhaustive per-subset search, the LCP/BP heuristics and the
//!   storage-aware upper bound.

pub mod chain;
pub mod error;
pub mod model;
pub mod optimize;
mod scenario;

pub use error::{Error, Result};
pub use scenario::Scenario;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
