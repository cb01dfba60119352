//! Exhaustive search over deterministic per-subset policies.

use rayon::prelude::*;

use crate::chain::{Evaluator, Partition, Policy};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Largest number of candidate policies allowed.
    pub budget: u64,
    /// Keep the reward of every candidate in the result.
    pub record_all: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: 10_000_000,
            record_all: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_policy: Policy,
    pub best_reward: f64,
    pub evaluated_count: u64,
    /// Candidate actions (one per subset) and their reward, in enumeration order.
    pub reward_by_policy: Option<Vec<(Vec<u32>, f64)>>,
}

pub fn search_partition_policy(
    scenario: &Scenario,
    partition: &Partition,
    e0: u32,
) -> Result<SearchResult> {
    search_partition_policy_with(scenario, partition, e0, SearchOptions::default())
}

/// Evaluates every assignment of one action per subset and keeps the best
/// long-run reward from `e0`. Ties go to the lexicographically smallest
/// action vector, independently of evaluation order.
pub fn search_partition_policy_with(
    scenario: &Scenario,
    partition: &Partition,
    e0: u32,
    opts: SearchOptions,
) -> Result<SearchResult> {
    if partition.e_max() != scenario.e_max() {
        return Err(Error::Config(format!(
            "partition covers 0..={}, battery has e_max = {}",
            partition.e_max(),
            scenario.e_max()
        )));
    }
    let actions = scenario.actions.as_slice();
    let n_subsets = partition.n_subsets();
    let candidates = (actions.len() as u128)
        .checked_pow(n_subsets as u32)
        .unwrap_or(u128::MAX);
    if candidates > opts.budget as u128 {
        return Err(Error::BudgetExceeded {
            candidates,
            budget: opts.budget,
        });
    }
    let count = candidates as u64;
    let evaluator = Evaluator::new(scenario)?;
    let subset_of: Vec<usize> = (0..=scenario.e_max())
        .map(|e| partition.observe(e))
        .collect();

    let decode = |mut idx: u64| -> Vec<u32> {
        let k = actions.len() as u64;
        let mut v = vec![0u32; n_subsets];
        for slot in v.iter_mut().rev() {
            *slot = actions[(idx % k) as usize];
            idx /= k;
        }
        v
    };
    let evaluate = |idx: u64| -> Result<f64> {
        let choice = decode(idx);
        let per_state: Vec<u32> = subset_of.iter().map(|&s| choice[s]).collect();
        evaluator.long_run_reward(&per_state, e0)
    };

    let (best_reward, best_idx, table) = if opts.record_all {
        let rewards: Vec<f64> = (0..count)
            .into_par_iter()
            .map(evaluate)
            .collect::<Result<_>>()?;
        let (best_idx, best_reward) =
            rewards
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc },
                );
        let table = rewards
            .iter()
            .enumerate()
            .map(|(i, &g)| (decode(i as u64), g))
            .collect();
        (best_reward, best_idx as u64, Some(table))
    } else {
        let (g, idx) = (0..count)
            .into_par_iter()
            .map(|i| evaluate(i).map(|g| (g, i)))
            .try_reduce(|| (f64::NEG_INFINITY, u64::MAX), |a, b| Ok(better(a, b)))?;
        (g, idx, None)
    };

    Ok(SearchResult {
        best_policy: Policy::partitioned(partition.clone(), decode(best_idx))?,
        best_reward,
        evaluated_count: count,
        reward_by_policy: table,
    })
}

/// Higher reward wins; equal rewards go to the smaller enumeration index.
fn better(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionSet, EfficiencyProfile};

    #[test]
    fn budget_is_enforced() {
        let s = Scenario::baseline();
        let p = Partition::uniform(100, 4).unwrap();
        let err = search_partition_policy(&s, &p, 0).unwrap_err();
        assert!(
            matches!(err, Error::BudgetExceeded { candidates, .. } if candidates == 101u128.pow(4))
        );
    }

    #[test]
    fn counts_and_ties() {
        let s = Scenario::baseline_with(12, EfficiencyProfile::QuadraticCapacitor { beta_nl: 1.3 })
            .with_actions(ActionSet::range(12, 3))
            .unwrap();
        let p = Partition::uniform(12, 2).unwrap();
        let opts = SearchOptions {
            record_all: true,
            ..SearchOptions::default()
        };
        let full = search_partition_policy_with(&s, &p, 0, opts).unwrap();
        assert_eq!(full.evaluated_count, 25);
        let table = full.reward_by_policy.as_ref().unwrap();
        assert_eq!(table.len(), 25);
        assert_eq!(table[1].0, vec![0, 3]);
        let best = table
            .iter()
            .map(|(_, g)| *g)
            .fold(f64::NEG_INFINITY, f64::max);
        let first = table.iter().find(|(_, g)| *g == best).unwrap();
        assert_eq!(full.best_reward, best);
        assert_eq!(
            full.best_policy,
            Policy::partitioned(p.clone(), first.0.clone()).unwrap()
        );

        let fast = search_partition_policy(&s, &p, 0).unwrap();
        assert_eq!(fast.best_policy, full.best_policy);
        assert_eq!(fast.best_reward, full.best_reward);
    }

    #[test]
    fn tie_break_prefers_smaller_vector() {
        assert_eq!(better((1.0, 5), (1.0, 3)), (1.0, 3));
        assert_eq!(better((1.0, 3), (1.0, 5)), (1.0, 3));
        assert_eq!(better((1.0, 3), (2.0, 5)), (2.0, 5));
    }
}
