use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observation map of the battery level: `{0..e_max}` split into contiguous
/// subsets, only the subset index is visible to the device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    e_max: u32,
    /// Inclusive upper end of every subset; the last one is `e_max`.
    upper: Vec<u32>,
}

impl Partition {
    pub fn from_upper_bounds(e_max: u32, upper: Vec<u32>) -> Result<Self> {
        if upper.last() != Some(&e_max) {
            return Err(Error::InvalidModel(format!(
                "partition must end at e_max = {e_max}, got {upper:?}"
            )));
        }
        if !upper.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidModel(format!(
                "partition bounds must be strictly increasing, got {upper:?}"
            )));
        }
        Ok(Partition { e_max, upper })
    }

    /// `n` subsets of (nearly) equal width. For `n = 2` this is
    /// LOW = `{0..floor(e_max/2)}`, HIGH = the rest.
    pub fn uniform(e_max: u32, n: usize) -> Result<Self> {
        if n == 0 || n > e_max as usize + 1 {
            return Err(Error::InvalidModel(format!(
                "cannot split {} levels into {n} subsets",
                e_max + 1
            )));
        }
        let upper = (0..n)
            .map(|i| {
                if i + 1 == n {
                    e_max
                } else {
                    ((i as u64 + 1) * e_max as u64 / n as u64) as u32
                }
            })
            .collect();
        Self::from_upper_bounds(e_max, upper)
    }

    /// One subset per level: perfect knowledge of the charge.
    pub fn singletons(e_max: u32) -> Self {
        Partition {
            e_max,
            upper: (0..=e_max).collect(),
        }
    }

    pub fn e_max(&self) -> u32 {
        self.e_max
    }

    pub fn n_subsets(&self) -> usize {
        self.upper.len()
    }

    pub fn upper_bounds(&self) -> &[u32] {
        &self.upper
    }

    /// Index of the subset containing level `e`.
    pub fn observe(&self, e: u32) -> usize {
        debug_assert!(e <= self.e_max);
        self.upper.partition_point(|&u| u < e)
    }

    pub fn members(&self, subset: usize) -> RangeInclusive<u32> {
        let lo = if subset == 0 {
            0
        } else {
            self.upper[subset - 1] + 1
        };
        lo..=self.upper[subset]
    }

    /// True when every subset of `coarser` is a union of subsets of `self`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.e_max == coarser.e_max && coarser.upper.iter().all(|u| self.upper.contains(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_high_split() {
        let p = Partition::uniform(100, 2).unwrap();
        assert_eq!(p.members(0), 0..=50);
        assert_eq!(p.members(1), 51..=100);
        assert_eq!(p.observe(50), 0);
        assert_eq!(p.observe(51), 1);
        let odd = Partition::uniform(7, 2).unwrap();
        assert_eq!(odd.members(0), 0..=3);
    }

    #[test]
    fn uniform_covers_every_level_once() {
        for e_max in [1u32, 2, 7, 30, 100] {
            for n in 1..=(e_max as usize + 1) {
                let p = Partition::uniform(e_max, n).unwrap();
                assert_eq!(p.n_subsets(), n);
                let mut seen = 0;
                for s in 0..n {
                    for e in p.members(s) {
                        assert_eq!(e, seen);
                        assert_eq!(p.observe(e), s);
                        seen += 1;
                    }
                }
                assert_eq!(seen, e_max + 1);
            }
        }
    }

    #[test]
    fn full_resolution_is_singletons() {
        assert_eq!(
            Partition::uniform(20, 21).unwrap(),
            Partition::singletons(20)
        );
    }

    #[test]
    fn refinement() {
        let fine = Partition::from_upper_bounds(10, vec![2, 5, 7, 10]).unwrap();
        let coarse = Partition::from_upper_bounds(10, vec![5, 10]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(Partition::singletons(10).refines(&fine));
    }

    #[test]
    fn invalid_partitions() {
        assert!(Partition::from_upper_bounds(10, vec![5, 9]).is_err());
        assert!(Partition::from_upper_bounds(10, vec![5, 5, 10]).is_err());
        assert!(Partition::uniform(3, 5).is_err());
        assert!(Partition::uniform(3, 0).is_err());
    }
}
