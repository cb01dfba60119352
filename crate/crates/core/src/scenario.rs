use crate::error::{Error, Result};
use crate::model::{
    ActionSet, ArrivalModel, BatteryModel, ConsumptionMap, EfficiencyProfile, RewardModel,
    StorageDynamics,
};

/// Everything needed to evaluate a policy: battery, harvest statistics,
/// reward, consumption and the admissible transmit powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub battery: BatteryModel,
    pub arrivals: ArrivalModel,
    pub consumption: ConsumptionMap,
    pub reward: RewardModel,
    pub actions: ActionSet,
}

impl Scenario {
    pub fn new(
        battery: BatteryModel,
        arrivals: ArrivalModel,
        consumption: ConsumptionMap,
        reward: RewardModel,
        actions: ActionSet,
    ) -> Result<Self> {
        battery.validate()?;
        consumption.validate()?;
        reward.validate()?;
        for &rho in actions.as_slice() {
            consumption
                .consumption(rho)
                .map_err(|_| Error::Config(format!("action {rho} has no consumption entry")))?;
        }
        Ok(Scenario {
            battery,
            arrivals,
            consumption,
            reward,
            actions,
        })
    }

    /// Capacitor battery of 100 quanta (beta_nl = 1.05, per-quantum storage),
    /// truncated geometric harvest with mean 20 and maximum 50, `ln(1 + 0.01 rho)`
    /// reward, no circuitry overhead and every integer power up to `e_max`.
    pub fn baseline() -> Self {
        Self::baseline_with(100, EfficiencyProfile::QuadraticCapacitor { beta_nl: 1.05 })
    }

    /// Baseline harvest/reward with a different battery.
    pub fn baseline_with(e_max: u32, efficiency: EfficiencyProfile) -> Self {
        let battery = BatteryModel::new(e_max, efficiency)
            .expect("valid battery")
            .with_dynamics(StorageDynamics::PerQuantum);
        Scenario::new(
            battery,
            ArrivalModel::truncated_geometric(20.0, 50).expect("valid arrivals"),
            ConsumptionMap::Identity,
            RewardModel::LogSnr { lambda: 0.01 },
            ActionSet::range(e_max, 1),
        )
        .expect("valid scenario")
    }

    pub fn e_max(&self) -> u32 {
        self.battery.e_max
    }

    pub fn with_efficiency(&self, efficiency: EfficiencyProfile) -> Result<Self> {
        let mut s = self.clone();
        s.battery.efficiency = efficiency;
        s.battery.validate()?;
        Ok(s)
    }

    pub fn with_actions(&self, actions: ActionSet) -> Result<Self> {
        Scenario::new(
            self.battery.clone(),
            self.arrivals.clone(),
            self.consumption.clone(),
            self.reward.clone(),
            actions,
        )
    }
}
