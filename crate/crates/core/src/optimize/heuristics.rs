//! Low-complexity policies for coarse charge observation.

use super::bound::BoundReport;
use crate::chain::{Partition, Policy};
use crate::error::{Error, Result};
use crate::model::{ActionSet, ConsumptionMap};

/// LCP: in every subset, the unweighted mean consumption of the
/// perfect-knowledge policy over the member levels, snapped to the action
/// with the nearest consumption (ties to the lower power).
pub fn derive_lcp(
    perfect: &Policy,
    cons: &ConsumptionMap,
    partition: &Partition,
    actions: &ActionSet,
) -> Result<Policy> {
    let per_state = perfect.per_state(partition.e_max());
    let chosen = (0..partition.n_subsets())
        .map(|s| {
            let members = partition.members(s);
            let count = members.clone().count() as f64;
            let total = members
                .map(|e| cons.consumption(per_state[e as usize]).map(|d| d as f64))
                .sum::<Result<f64>>()?;
            actions.nearest_by_consumption(cons, total / count)
        })
        .collect::<Result<Vec<_>>>()?;
    Policy::partitioned(partition.clone(), chosen)
}

/// BP for a LOW/HIGH split: stay idle when LOW, and when HIGH consume about
/// the storable mean harvest `b_bar_s`.
pub fn derive_bp(
    partition: &Partition,
    bound: &BoundReport,
    cons: &ConsumptionMap,
    actions: &ActionSet,
) -> Result<Policy> {
    if partition.n_subsets() != 2 {
        return Err(Error::UnsupportedPartition(partition.n_subsets()));
    }
    let high = actions.nearest_by_consumption(cons, bound.b_bar_s)?;
    Policy::partitioned(partition.clone(), vec![0, high])
}
