//! Markov chain induced by a policy: construction, long-run evaluation and
//! Monte Carlo cross-check.

pub mod analysis;
pub mod partition;
pub mod policy;
pub mod simulate;

pub use analysis::{
    analyze, build_chain, cesaro_occupation, long_run_average, Chain, ChainAnalysis, Evaluator,
    StepTable, TransitionMatrix,
};
pub use partition::Partition;
pub use policy::Policy;
pub use simulate::{simulate, SimulationReport};
