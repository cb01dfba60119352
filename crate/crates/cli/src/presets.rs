//! Built-in experiment configurations.
//!
//! - `fig2`: perfect-knowledge policies on the 100-quanta capacitor, next to
//!   the lossless reference.
//! - `fig3`: best LOW/HIGH-style policies for 1, 2 and 3 observable subsets.
//! - `fig4`: throughput against battery size for every policy family.
//! - `fig5`: measured radio front-end in four bands with a Shannon-rate reward.

use ehd_core::model::{Band, EfficiencyProfile, StorageDynamics};

use crate::config::{
    ActionsConfig, ArrivalConfig, ArrivalFamily, BatteryConfig, ConsumptionConfig, PartitionConfig,
    PolicyConfig, PolicySource, RewardConfig, ScenarioConfig, SimulationConfig, SweepConfig,
};
use crate::error::{CliError, Result};

pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

/// Battery sizes of the throughput sweep.
pub const FIG4_E_MAX: [u32; 10] = [10, 20, 30, 50, 75, 100, 150, 200, 250, 300];
pub const FIG5_E_MAX: [u32; 6] = [60, 80, 100, 150, 200, 300];

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "fig2" => Ok(fig2()),
        "fig3" => Ok(fig3()),
        "fig4" => Ok(fig4()),
        "fig5" => Ok(fig5()),
        other => Err(CliError::UnknownPreset(other.to_string())),
    }
}

fn baseline(name: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        seed: 1,
        initial_level: 0,
        battery: BatteryConfig {
            e_max: 100,
            efficiency: EfficiencyProfile::QuadraticCapacitor { beta_nl: 1.05 },
            dynamics: StorageDynamics::PerQuantum,
            frame_length: 1.0,
            slot_length: 0.005,
            quantum_joules: 1e-5,
        },
        arrivals: ArrivalConfig {
            family: ArrivalFamily::TruncatedGeometric,
            mean: 20.0,
            b_max: 50,
        },
        reward: RewardConfig::LogSnr { lambda: 0.01 },
        consumption: ConsumptionConfig::Identity,
        actions: ActionsConfig::default(),
        partition: PartitionConfig::default(),
        policy: PolicyConfig::default(),
        simulation: SimulationConfig::default(),
        sweep: SweepConfig::default(),
    }
}

pub fn fig2() -> ScenarioConfig {
    let mut c = baseline("fig2");
    c.policy.source = PolicySource::Solve;
    c
}

pub fn fig3() -> ScenarioConfig {
    let mut c = baseline("fig3");
    // 51^3 candidates for three subsets; the full 101-level grid would need 10^6
    c.actions.max = Some(50);
    c.sweep.subsets = vec![1, 2, 3];
    c
}

pub fn fig4() -> ScenarioConfig {
    let mut c = baseline("fig4");
    c.actions.max = Some(50);
    c.sweep = SweepConfig {
        e_max: FIG4_E_MAX.to_vec(),
        subsets: vec![2],
        bands: vec![],
        policies: vec![
            PolicySource::Solve,
            PolicySource::Search,
            PolicySource::Lcp,
            PolicySource::Bp,
            PolicySource::CrossApply,
        ],
    };
    c
}

pub fn fig5() -> ScenarioConfig {
    let mut c = baseline("fig5");
    c.arrivals = ArrivalConfig {
        family: ArrivalFamily::TruncatedPoisson,
        mean: 30.0,
        b_max: 50,
    };
    c.reward = RewardConfig::Shannon {
        bandwidth_hz: 2e6,
        noise_density: 10f64.powf(-20.4),
        channel_gain: 3e-13,
    };
    c.consumption = ConsumptionConfig::Device { band: Band::Mhz315 };
    c.battery.e_max = FIG5_E_MAX[0];
    c.sweep = SweepConfig {
        e_max: FIG5_E_MAX.to_vec(),
        subsets: vec![2],
        bands: Band::ALL.to_vec(),
        policies: vec![
            PolicySource::Solve,
            PolicySource::Search,
            PolicySource::Lcp,
            PolicySource::Bp,
            PolicySource::CrossApply,
        ],
    };
    c
}
