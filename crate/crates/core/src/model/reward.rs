//! Instantaneous rewards, transmit-power to consumption mapping and the
//! admissible action set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardModel {
    /// `ln(1 + lambda * rho)`.
    LogSnr { lambda: f64 },
    /// Shannon rate over the transmission slot, in bit/s averaged over the
    /// frame: `(delta/T) * W * log2(1 + H * rho_w / (W * N0))` where
    /// `rho_w = rho * quantum_joules / delta` is the transmit power in watts.
    Shannon {
        bandwidth_hz: f64,
        noise_density: f64,
        channel_gain: f64,
        frame_length: f64,
        slot_length: f64,
        quantum_joules: f64,
    },
}

impl RewardModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            RewardModel::LogSnr { lambda } => *lambda > 0.0 && lambda.is_finite(),
            RewardModel::Shannon {
                bandwidth_hz,
                noise_density,
                channel_gain,
                frame_length,
                slot_length,
                quantum_joules,
            } => {
                [
                    *bandwidth_hz,
                    *noise_density,
                    *channel_gain,
                    *frame_length,
                    *slot_length,
                    *quantum_joules,
                ]
                .iter()
                .all(|v| *v > 0.0 && v.is_finite())
                    && slot_length < frame_length
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "invalid reward parameters {self:?}"
            )))
        }
    }

    /// Reward for a (possibly fractional) transmit power in quanta. The same
    /// function evaluated at the mean harvest gives the throughput bounds.
    pub fn value(&self, rho: f64) -> f64 {
        match self {
            RewardModel::LogSnr { lambda } => (lambda * rho).ln_1p(),
            RewardModel::Shannon {
                bandwidth_hz,
                noise_density,
                channel_gain,
                frame_length,
                slot_length,
                quantum_joules,
            } => {
                let watts = rho * quantum_joules / slot_length;
                let snr = channel_gain * watts / (bandwidth_hz * noise_density);
                slot_length / frame_length * bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2
            }
        }
    }

    /// Numerical shape check on `[0, rho_max]`: `r(0) = 0`, strictly
    /// increasing and concave on a uniform grid.
    pub fn check_shape(&self, rho_max: f64, points: usize) -> bool {
        if self.value(0.0) != 0.0 {
            return false;
        }
        if points < 3 {
            return true;
        }
        let h = rho_max / (points - 1) as f64;
        let v: Vec<f64> = (0..points).map(|i| self.value(i as f64 * h)).collect();
        let increasing = v.windows(2).all(|w| w[1] > w[0]);
        let scale = v.last().copied().unwrap_or(1.0).abs().max(1.0);
        let concave = v
            .windows(3)
            .all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-12 * scale);
        increasing && concave
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConsumptionMap {
    /// No circuitry overhead: consuming `rho` quanta to transmit at `rho`.
    #[default]
    Identity,
    /// Discrete device levels `(tx_power, consumption)` in quanta. The idle
    /// action 0 always consumes nothing and is not listed.
    DeviceTable { rows: Vec<(u32, u32)> },
}

impl ConsumptionMap {
    pub fn validate(&self) -> Result<()> {
        if let ConsumptionMap::DeviceTable { rows } = self {
            if rows.iter().any(|(tx, _)| *tx == 0) {
                return Err(Error::InvalidModel(
                    "device table rows must have positive transmit power".into(),
                ));
            }
            if !rows.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(Error::InvalidModel(
                    "device table must be strictly increasing in transmit power".into(),
                ));
            }
            if let Some((tx, d)) = rows.iter().find(|(tx, d)| d < tx) {
                return Err(Error::InvalidModel(format!(
                    "consumption {d} below transmit power {tx}"
                )));
            }
        }
        Ok(())
    }

    /// Quanta drawn from the battery when transmitting at `rho`.
    pub fn consumption(&self, rho: u32) -> Result<u32> {
        match self {
            ConsumptionMap::Identity => Ok(rho),
            ConsumptionMap::DeviceTable { rows } => {
                if rho == 0 {
                    return Ok(0);
                }
                rows.binary_search_by_key(&rho, |(tx, _)| *tx)
                    .map(|i| rows[i].1)
                    .map_err(|_| Error::Domain(format!("no device level for transmit power {rho}")))
            }
        }
    }

    /// Idle plus every tabulated level, or `None` for the identity map.
    pub fn device_actions(&self) -> Option<ActionSet> {
        match self {
            ConsumptionMap::Identity => None,
            ConsumptionMap::DeviceTable { rows } => Some(ActionSet(
                std::iter::once(0)
                    .chain(rows.iter().map(|(tx, _)| *tx))
                    .collect(),
            )),
        }
    }
}

/// Sorted, distinct transmit powers in quanta, always including idle (0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ActionSet(Vec<u32>);

impl ActionSet {
    pub fn new(actions: Vec<u32>) -> Result<Self> {
        if actions.first() != Some(&0) {
            return Err(Error::InvalidModel(
                "action set must start with the idle action 0".into(),
            ));
        }
        if !actions.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidModel(
                "action set must be sorted and distinct".into(),
            ));
        }
        Ok(ActionSet(actions))
    }

    /// `{0, step, 2*step, ...}` up to and including `max` when it falls on the grid.
    pub fn range(max: u32, step: u32) -> Self {
        let step = step.max(1);
        ActionSet((0..=max).step_by(step as usize).collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, rho: u32) -> bool {
        self.0.binary_search(&rho).is_ok()
    }

    pub fn max(&self) -> u32 {
        *self.0.last().expect("contains idle")
    }

    /// Action whose consumption is closest to `target`; ties go to the
    /// lower-power action.
    pub fn nearest_by_consumption(&self, cons: &ConsumptionMap, target: f64) -> Result<u32> {
        let mut best = (f64::INFINITY, 0);
        for &rho in &self.0 {
            let gap = (cons.consumption(rho)? as f64 - target).abs();
            if gap < best.0 {
                best = (gap, rho);
            }
        }
        Ok(best.1)
    }
}

impl TryFrom<Vec<u32>> for ActionSet {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        ActionSet::new(v)
    }
}

impl From<ActionSet> for Vec<u32> {
    fn from(a: ActionSet) -> Self {
        a.0
    }
}

/// Reward collected in a frame that starts at level `e` and transmits at
/// `rho`: the full reward if the battery covers the consumption, else zero
/// (the codeword is cut short).
pub fn attained_reward(
    reward: &RewardModel,
    cons: &ConsumptionMap,
    actions: &ActionSet,
    rho: u32,
    e: u32,
) -> Result<f64> {
    if !actions.contains(rho) {
        return Err(Error::Domain(format!("{rho} is not an admissible action")));
    }
    if rho == 0 || cons.consumption(rho)? > e {
        return Ok(0.0);
    }
    Ok(reward.value(rho as f64))
}
