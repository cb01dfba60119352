//! Optimal and heuristic policies and the storage-aware upper bound.

pub mod bound;
pub mod heuristics;
pub mod rvi;
pub mod search;

pub use bound::{beta_star, quantized_increment, upper_bound, BoundReport};
pub use heuristics::{derive_bp, derive_lcp};
pub use rvi::{solve_perfect_soc, solve_perfect_soc_with, PerfectSocSolution, RviOptions};
pub use search::{
    search_partition_policy, search_partition_policy_with, SearchOptions, SearchResult,
};
