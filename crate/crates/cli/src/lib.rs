//! Configuration, presets and experiment runners behind the `ehd` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::ScenarioConfig;
pub use error::{CliError, Result};
