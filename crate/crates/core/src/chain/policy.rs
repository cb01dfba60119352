use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::error::{Error, Result};
use crate::model::ActionSet;

/// Deterministic transmit-power rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// One action per battery level (perfect knowledge of the charge).
    State(Vec<u32>),
    /// One action per observable subset.
    Partitioned {
        partition: Partition,
        actions: Vec<u32>,
    },
}

impl Policy {
    pub fn zero(e_max: u32) -> Self {
        Policy::State(vec![0; e_max as usize + 1])
    }

    pub fn constant(e_max: u32, rho: u32) -> Self {
        Policy::Partitioned {
            partition: Partition::uniform(e_max, 1).expect("one subset"),
            actions: vec![rho],
        }
    }

    pub fn partitioned(partition: Partition, actions: Vec<u32>) -> Result<Self> {
        if actions.len() != partition.n_subsets() {
            return Err(Error::Config(format!(
                "{} actions for {} subsets",
                actions.len(),
                partition.n_subsets()
            )));
        }
        Ok(Policy::Partitioned { partition, actions })
    }

    pub fn action_at(&self, e: u32) -> u32 {
        match self {
            Policy::State(d) => d[e as usize],
            Policy::Partitioned { partition, actions } => actions[partition.observe(e)],
        }
    }

    /// Action for every level `0..=e_max`.
    pub fn per_state(&self, e_max: u32) -> Vec<u32> {
        (0..=e_max).map(|e| self.action_at(e)).collect()
    }

    pub fn validate(&self, e_max: u32, admissible: &ActionSet) -> Result<()> {
        let (len, actions) = match self {
            Policy::State(d) => (d.len(), d.as_slice()),
            Policy::Partitioned { partition, actions } => {
                if partition.e_max() != e_max {
                    return Err(Error::Config(format!(
                        "partition covers 0..={}, battery has e_max = {e_max}",
                        partition.e_max()
                    )));
                }
                if actions.len() != partition.n_subsets() {
                    return Err(Error::Config("one action per subset required".into()));
                }
                (e_max as usize + 1, actions.as_slice())
            }
        };
        if len != e_max as usize + 1 {
            return Err(Error::Config(format!(
                "state policy has {len} entries, expected {}",
                e_max + 1
            )));
        }
        if let Some(rho) = actions.iter().find(|r| !admissible.contains(**r)) {
            return Err(Error::Domain(format!(
                "policy uses inadmissible action {rho}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitioned_reads_through_observation() {
        let p = Policy::partitioned(Partition::uniform(10, 2).unwrap(), vec![0, 4]).unwrap();
        assert_eq!(p.action_at(5), 0);
        assert_eq!(p.action_at(6), 4);
        assert_eq!(p.per_state(10), vec![0, 0, 0, 0, 0, 0, 4, 4, 4, 4, 4]);
    }

    #[test]
    fn validation() {
        let a = ActionSet::range(10, 1);
        assert!(Policy::zero(10).validate(10, &a).is_ok());
        assert!(Policy::zero(9).validate(10, &a).is_err());
        assert!(Policy::State(vec![11; 11]).validate(10, &a).is_err());
        assert!(Policy::partitioned(Partition::uniform(10, 2).unwrap(), vec![1]).is_err());
        assert!(Policy::constant(12, 1).validate(10, &a).is_err());
    }
}
