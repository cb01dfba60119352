//! Physical model of the harvesting device.

pub mod arrivals;
pub mod battery;
pub mod device;
pub mod efficiency;
pub mod reward;

pub use arrivals::{sample_arrival, ArrivalModel, ArrivalSampler};
pub use battery::{
    round_quanta, validate_recharge_hypothesis, BatteryModel, RechargeCheck, StorageDynamics,
};
pub use device::{device_table, Band};
pub use efficiency::{efficiency_at, EfficiencyProfile};
pub use reward::{attained_reward, ActionSet, ConsumptionMap, RewardModel};
