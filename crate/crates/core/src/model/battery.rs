//! Battery with state-dependent storage losses: intra-frame charging,
//! quantized frame-to-frame update and the recharge sanity check.

use serde::{Deserialize, Serialize};

use super::arrivals::ArrivalModel;
use super::efficiency::EfficiencyProfile;
use crate::error::{Error, Result};

/// How harvested energy accumulates inside one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageDynamics {
    /// Continuous charging `dy/dt = (b/T) * eta(y)` integrated with
    /// fixed-step RK4 (`integration_steps` steps per frame).
    #[default]
    Ode,
    /// The `b` arriving quanta are stored one after the other, each at the
    /// efficiency of the rounded level reached so far:
    /// `y <- min(y + eta(Round(y)), e_max)`.
    PerQuantum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryModel {
    /// Capacity in energy quanta.
    pub e_max: u32,
    pub efficiency: EfficiencyProfile,
    /// Frame length `T` in seconds.
    #[serde(default = "default_frame_length")]
    pub frame_length: f64,
    /// Transmission slot `delta < T` in seconds.
    #[serde(default = "default_slot_length")]
    pub slot_length: f64,
    #[serde(default = "default_integration_steps")]
    pub integration_steps: u32,
    #[serde(default)]
    pub dynamics: StorageDynamics,
}

fn default_frame_length() -> f64 {
    1.0
}

fn default_slot_length() -> f64 {
    0.005
}

fn default_integration_steps() -> u32 {
    256
}

/// Nearest integer, ties away from zero.
pub fn round_quanta(x: f64) -> u32 {
    let r = x.round();
    if r <= 0.0 {
        0
    } else {
        r as u32
    }
}

impl BatteryModel {
    pub fn new(e_max: u32, efficiency: EfficiencyProfile) -> Result<Self> {
        let model = BatteryModel {
            e_max,
            efficiency,
            frame_length: default_frame_length(),
            slot_length: default_slot_length(),
            integration_steps: default_integration_steps(),
            dynamics: StorageDynamics::Ode,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_dynamics(mut self, dynamics: StorageDynamics) -> Self {
        self.dynamics = dynamics;
        self
    }

    pub fn with_timing(mut self, frame_length: f64, slot_length: f64) -> Result<Self> {
        self.frame_length = frame_length;
        self.slot_length = slot_length;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.e_max == 0 {
            return Err(Error::InvalidModel("e_max must be at least 1".into()));
        }
        if !(self.frame_length > 0.0 && self.slot_length > 0.0)
            || self.slot_length >= self.frame_length
        {
            return Err(Error::InvalidModel(format!(
                "need 0 < slot_length < frame_length, got {} and {}",
                self.slot_length, self.frame_length
            )));
        }
        if self.integration_steps == 0 {
            return Err(Error::InvalidModel("integration_steps must be >= 1".into()));
        }
        self.efficiency.validate(self.e_max)
    }

    pub fn efficiency_at(&self, e: f64) -> Result<f64> {
        self.efficiency.at(e, self.e_max)
    }

    /// Continuous end-of-frame level when `b` quanta are harvested starting
    /// from `e_start`, before rounding. Growth saturates at `e_max`.
    pub fn integrate_frame(&self, e_start: f64, b: u32) -> Result<f64> {
        if !(0.0..=self.e_max as f64).contains(&e_start) {
            return Err(Error::Domain(format!(
                "start level {e_start} outside [0, {}]",
                self.e_max
            )));
        }
        Ok(self.charge(e_start, b, true))
    }

    /// Level reached without the capacity limit. Used to isolate storage
    /// losses from overflow.
    pub(crate) fn integrate_unsaturated(&self, e_start: f64, b: u32) -> f64 {
        self.charge(e_start, b, false)
    }

    fn charge(&self, e_start: f64, b: u32, saturate: bool) -> f64 {
        if b == 0 {
            return e_start;
        }
        let cap = if saturate {
            self.e_max as f64
        } else {
            f64::INFINITY
        };
        let eta = |y: f64| self.efficiency.extended(y, self.e_max);
        match self.dynamics {
            StorageDynamics::Ode => {
                // time normalised by the frame length: dy/ds = b * eta(y), s in [0, 1]
                let rate = b as f64;
                let h = 1.0 / self.integration_steps as f64;
                let f = |y: f64| rate * eta(y);
                let mut y = e_start;
                for _ in 0..self.integration_steps {
                    if y >= cap {
                        return cap;
                    }
                    let k1 = f(y);
                    let k2 = f(y + 0.5 * h * k1);
                    let k3 = f(y + 0.5 * h * k2);
                    let k4 = f(y + h * k3);
                    y = (y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).min(cap);
                }
                y
            }
            StorageDynamics::PerQuantum => {
                let mut y = e_start;
                for _ in 0..b {
                    if y >= cap {
                        return cap;
                    }
                    y = (y + eta(y.round())).min(cap);
                }
                y
            }
        }
    }

    /// Next battery level after consuming `d` quanta at the start of the
    /// frame and harvesting `b` quanta during it.
    pub fn battery_step(&self, e: u32, d: u32, b: u32) -> Result<u32> {
        if e > self.e_max {
            return Err(Error::Domain(format!(
                "battery level {e} above capacity {}",
                self.e_max
            )));
        }
        let start = e.saturating_sub(d);
        let y = self.charge(start as f64, b, true);
        Ok(round_quanta(y).min(self.e_max))
    }
}

/// Outcome of [`validate_recharge_hypothesis`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RechargeCheck {
    pub holds: bool,
    /// Non-full levels from which a maximal arrival does not add a full quantum.
    pub violating: Vec<u32>,
}

/// Checks that from every non-full level the largest possible arrival adds at
/// least one stored quantum, so that no level is a dead end for recharging.
pub fn validate_recharge_hypothesis(
    model: &BatteryModel,
    arrivals: &ArrivalModel,
) -> RechargeCheck {
    let b_max = arrivals.b_max();
    let violating: Vec<u32> = (0..model.e_max)
        .filter(|&e| {
            let next = model
                .battery_step(e, 0, b_max)
                .expect("level within capacity");
            next < e + 1
        })
        .collect();
    RechargeCheck {
        holds: violating.is_empty(),
        violating,
    }
}
