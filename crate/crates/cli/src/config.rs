//! Experiment description read from a TOML file.

use std::path::Path;

use ehd_core::chain::Partition;
use ehd_core::model::{
    device_table, ActionSet, ArrivalModel, Band, BatteryModel, ConsumptionMap, EfficiencyProfile,
    RewardModel, StorageDynamics,
};
use ehd_core::Scenario;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Scenario id written to every result row.
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Battery level at which every chain is started.
    #[serde(default)]
    pub initial_level: u32,
    pub battery: BatteryConfig,
    pub arrivals: ArrivalConfig,
    pub reward: RewardConfig,
    #[serde(default)]
    pub consumption: ConsumptionConfig,
    #[serde(default)]
    pub actions: ActionsConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default, skip_serializing_if = "SweepConfig::is_empty")]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub e_max: u32,
    pub efficiency: EfficiencyProfile,
    #[serde(default)]
    pub dynamics: StorageDynamics,
    /// Frame length in seconds.
    #[serde(default = "default_frame")]
    pub frame_length: f64,
    /// Transmission slot in seconds.
    #[serde(default = "default_slot")]
    pub slot_length: f64,
    /// Energy of one quantum in joules.
    #[serde(default = "default_quantum")]
    pub quantum_joules: f64,
}

fn default_frame() -> f64 {
    1.0
}

fn default_slot() -> f64 {
    0.005
}

fn default_quantum() -> f64 {
    1e-5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalFamily {
    TruncatedGeometric,
    TruncatedPoisson,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalConfig {
    pub family: ArrivalFamily,
    /// Mean arrivals per frame (ignored by `degenerate`, which uses `b_max`).
    #[serde(default)]
    pub mean: f64,
    pub b_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardConfig {
    LogSnr {
        lambda: f64,
    },
    /// Timing and quantum size are taken from the battery section.
    Shannon {
        bandwidth_hz: f64,
        noise_density: f64,
        channel_gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConsumptionConfig {
    #[default]
    Identity,
    /// Measured radio table for one band; a sweep band list overrides it.
    Device { band: Band },
}

/// Either an explicit list or the range `0, step, 2 step, ..` up to
/// `min(max, e_max)` (`max` defaults to `e_max`). With a device table and no
/// explicit list, the device transmit levels are used.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u32>,
}

/// Number of equal subsets or explicit inclusive upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bounds: Option<Vec<u32>>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            subsets: Some(2),
            upper_bounds: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySource {
    /// Value iteration with perfect knowledge of the level.
    Solve,
    /// Exhaustive search over per-subset actions.
    Search,
    Lcp,
    Bp,
    /// Per-subset actions given in the config.
    Fixed,
    /// Search on a lossless battery, evaluated on the configured one.
    CrossApply,
}

impl PolicySource {
    pub const ALL: [PolicySource; 6] = [
        PolicySource::Solve,
        PolicySource::Search,
        PolicySource::Lcp,
        PolicySource::Bp,
        PolicySource::Fixed,
        PolicySource::CrossApply,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub source: PolicySource,
    /// Per-subset actions for `fixed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<u32>>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            source: PolicySource::Search,
            actions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub frames: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { frames: 1_000_000 }
    }
}

/// Axes of a sweep; an empty axis keeps the single value of the base config.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub e_max: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bands: Vec<Band>,
    /// Policies evaluated at every point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub policies: Vec<PolicySource>,
}

impl SweepConfig {
    pub fn is_empty(&self) -> bool {
        self.e_max.is_empty()
            && self.subsets.is_empty()
            && self.bands.is_empty()
            && self.policies.is_empty()
    }
}

fn field(name: &str, message: impl Into<String>) -> CliError {
    CliError::Field {
        field: name.to_string(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks every field that can be checked without building a model for
    /// each sweep point, then builds the base scenario.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(field("name", "must not be empty"));
        }
        let b = &self.battery;
        if !(b.quantum_joules > 0.0 && b.quantum_joules.is_finite()) {
            return Err(field("battery.quantum_joules", "must be positive"));
        }
        if self.arrivals.family != ArrivalFamily::Degenerate
            && !(self.arrivals.mean > 0.0 && self.arrivals.mean < self.arrivals.b_max as f64)
        {
            return Err(field(
                "arrivals.mean",
                format!("must lie in (0, b_max = {})", self.arrivals.b_max),
            ));
        }
        if self.actions.step == Some(0) {
            return Err(field("actions.step", "must be at least 1"));
        }
        if self.actions.list.is_some()
            && (self.actions.max.is_some() || self.actions.step.is_some())
        {
            return Err(field(
                "actions",
                "give either `list` or `max`/`step`, not both",
            ));
        }
        match (&self.partition.subsets, &self.partition.upper_bounds) {
            (Some(0), _) => return Err(field("partition.subsets", "must be at least 1")),
            (Some(_), Some(_)) => {
                return Err(field(
                    "partition",
                    "give either `subsets` or `upper_bounds`",
                ))
            }
            (None, None) => return Err(field("partition", "missing `subsets` or `upper_bounds`")),
            _ => {}
        }
        if self.policy.source == PolicySource::Fixed && self.policy.actions.is_none() {
            return Err(field("policy.actions", "required when source = \"fixed\""));
        }
        if self.sweep.subsets.contains(&0) {
            return Err(field("sweep.subsets", "every entry must be at least 1"));
        }
        if self.sweep.e_max.contains(&0) {
            return Err(field("sweep.e_max", "every entry must be at least 1"));
        }
        if self.simulation.frames == 0 {
            return Err(field("simulation.frames", "must be at least 1"));
        }
        let scenario = self.scenario(self.battery.e_max, None)?;
        if self.initial_level > scenario.e_max() {
            return Err(field("initial_level", "exceeds battery.e_max"));
        }
        self.partition(self.battery.e_max, None)?;
        Ok(())
    }

    /// Band in effect when no sweep band is given.
    pub fn base_band(&self) -> Option<Band> {
        match self.consumption {
            ConsumptionConfig::Identity => None,
            ConsumptionConfig::Device { band } => Some(band),
        }
    }

    /// Scenario for one sweep point.
    pub fn scenario(&self, e_max: u32, band: Option<Band>) -> Result<Scenario> {
        let b = &self.battery;
        let battery = BatteryModel::new(e_max, b.efficiency.clone())
            .map_err(|e| field("battery", e.to_string()))?
            .with_dynamics(b.dynamics)
            .with_timing(b.frame_length, b.slot_length)
            .map_err(|e| field("battery", e.to_string()))?;

        let a = &self.arrivals;
        let arrivals = match a.family {
            ArrivalFamily::TruncatedGeometric => ArrivalModel::truncated_geometric(a.mean, a.b_max),
            ArrivalFamily::TruncatedPoisson => ArrivalModel::truncated_poisson(a.mean, a.b_max),
            ArrivalFamily::Degenerate => Ok(ArrivalModel::degenerate(a.b_max)),
        }
        .map_err(|e| field("arrivals", e.to_string()))?;

        let reward = match self.reward {
            RewardConfig::LogSnr { lambda } => RewardModel::LogSnr { lambda },
            RewardConfig::Shannon {
                bandwidth_hz,
                noise_density,
                channel_gain,
            } => RewardModel::Shannon {
                bandwidth_hz,
                noise_density,
                channel_gain,
                frame_length: b.frame_length,
                slot_length: b.slot_length,
                quantum_joules: b.quantum_joules,
            },
        };

        let consumption = match band.or(self.base_band()) {
            None => ConsumptionMap::Identity,
            Some(band) => device_table(band, b.slot_length, b.quantum_joules),
        };

        let actions = match (&self.actions.list, consumption.device_actions()) {
            (Some(list), _) => ActionSet::new(list.clone()),
            (None, Some(device)) if self.actions.max.is_none() && self.actions.step.is_none() => {
                Ok(device)
            }
            _ => Ok(ActionSet::range(
                self.actions.max.unwrap_or(e_max).min(e_max),
                self.actions.step.unwrap_or(1),
            )),
        }
        .map_err(|e| field("actions", e.to_string()))?;

        Scenario::new(battery, arrivals, consumption, reward, actions)
            .map_err(|e| field("scenario", e.to_string()))
    }

    /// Partition for one sweep point; `subsets` overrides the configured one.
    pub fn partition(&self, e_max: u32, subsets: Option<usize>) -> Result<Partition> {
        let built = match (
            subsets,
            &self.partition.upper_bounds,
            self.partition.subsets,
        ) {
            (Some(n), _, _) | (None, None, Some(n)) => Partition::uniform(e_max, n),
            (None, Some(upper), _) => Partition::from_upper_bounds(e_max, upper.clone()),
            (None, None, None) => {
                return Err(field("partition", "missing `subsets` or `upper_bounds`"))
            }
        };
        built.map_err(|e| field("partition", e.to_string()))
    }

    pub fn e_max_axis(&self) -> Vec<u32> {
        if self.sweep.e_max.is_empty() {
            vec![self.battery.e_max]
        } else {
            self.sweep.e_max.clone()
        }
    }

    pub fn subsets_axis(&self) -> Vec<Option<usize>> {
        if self.sweep.subsets.is_empty() {
            vec![None]
        } else {
            self.sweep.subsets.iter().map(|&n| Some(n)).collect()
        }
    }

    pub fn band_axis(&self) -> Vec<Option<Band>> {
        if self.sweep.bands.is_empty() {
            vec![self.base_band()]
        } else {
            self.sweep.bands.iter().map(|&b| Some(b)).collect()
        }
    }

    pub fn policy_axis(&self) -> Vec<PolicySource> {
        if self.sweep.policies.is_empty() {
            vec![self.policy.source]
        } else {
            self.sweep.policies.clone()
        }
    }
}
