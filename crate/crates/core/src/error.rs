use thiserror::Error;

/// Errors raised by model construction, chain analysis and policy search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value outside its domain: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("transition row {row} sums to {sum}, expected 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error(
        "exhaustive search needs {candidates} evaluations, budget is {budget}; \
         coarsen the action set or reduce the number of subsets"
    )]
    BudgetExceeded { candidates: u128, budget: u64 },

    #[error("balanced policy is defined for two subsets only, got {0}")]
    UnsupportedPartition(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
