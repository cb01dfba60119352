//! Storage efficiency profiles: the fraction of incoming harvest power that
//! actually ends up in the battery as a function of the current charge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EfficiencyProfile {
    /// A fixed fraction of the incoming power is stored.
    Constant { eta: f64 },
    /// Capacitor-like losses, lossless at half charge and worst at the edges:
    /// `1 - (e - e_max/2)^2 / (beta_nl * (e_max/2)^2)`.
    QuadraticCapacitor { beta_nl: f64 },
    /// One value per integer charge level `0..=e_max`, linearly interpolated.
    Tabulated { values: Vec<f64> },
}

impl EfficiencyProfile {
    /// Lossless battery.
    pub fn ideal() -> Self {
        EfficiencyProfile::Constant { eta: 1.0 }
    }

    pub fn validate(&self, e_max: u32) -> Result<()> {
        match self {
            EfficiencyProfile::Constant { eta } => {
                if !(*eta > 0.0 && *eta <= 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "constant efficiency {eta} not in (0, 1]"
                    )));
                }
            }
            EfficiencyProfile::QuadraticCapacitor { beta_nl } => {
                if beta_nl.is_nan() || *beta_nl <= 1.0 || !beta_nl.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "beta_nl = {beta_nl} must be a finite value > 1"
                    )));
                }
            }
            EfficiencyProfile::Tabulated { values } => {
                if values.len() != e_max as usize + 1 {
                    return Err(Error::InvalidModel(format!(
                        "tabulated efficiency has {} knots, expected e_max + 1 = {}",
                        values.len(),
                        e_max + 1
                    )));
                }
                if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
                    return Err(Error::InvalidModel(format!(
                        "tabulated efficiency {v} not in (0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Efficiency at a continuous charge level `e` in `[0, e_max]`.
    pub fn at(&self, e: f64, e_max: u32) -> Result<f64> {
        if !(0.0..=e_max as f64).contains(&e) {
            return Err(Error::Domain(format!(
                "charge level {e} outside [0, {e_max}]"
            )));
        }
        Ok(self.extended(e, e_max))
    }

    /// Same formula without the domain check. Outside `[0, e_max]` the
    /// capacitor parabola is floored at zero (storage never drains the
    /// battery) and tables hold the end knot.
    pub(crate) fn extended(&self, e: f64, e_max: u32) -> f64 {
        match self {
            EfficiencyProfile::Constant { eta } => *eta,
            EfficiencyProfile::QuadraticCapacitor { beta_nl } => {
                let half = e_max as f64 / 2.0;
                (1.0 - (e - half).powi(2) / (beta_nl * half * half)).max(0.0)
            }
            EfficiencyProfile::Tabulated { values } => {
                let last = values.len() - 1;
                if e <= 0.0 {
                    return values[0];
                }
                if e >= last as f64 {
                    return values[last];
                }
                let lo = e.floor() as usize;
                let frac = e - lo as f64;
                values[lo] + frac * (values[lo + 1] - values[lo])
            }
        }
    }
}

/// Free-function form of [`EfficiencyProfile::at`].
pub fn efficiency_at(profile: &EfficiencyProfile, e: f64, e_max: u32) -> Result<f64> {
    profile.at(e, e_max)
}
