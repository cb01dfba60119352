//! Measured radio front-end of an MSP430-class SoC with an RF core: overall
//! power draw for four transmit levels in four sub-GHz bands.

use serde::{Deserialize, Serialize};

use super::battery::round_quanta;
use super::reward::ConsumptionMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "315MHz")]
    Mhz315,
    #[serde(rename = "433MHz")]
    Mhz433,
    #[serde(rename = "868MHz")]
    Mhz868,
    #[serde(rename = "915MHz")]
    Mhz915,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Mhz315, Band::Mhz433, Band::Mhz868, Band::Mhz915];

    pub fn label(self) -> &'static str {
        match self {
            Band::Mhz315 => "315MHz",
            Band::Mhz433 => "433MHz",
            Band::Mhz868 => "868MHz",
            Band::Mhz915 => "915MHz",
        }
    }

    fn column(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Band::ALL
            .into_iter()
            .find(|b| b.label().eq_ignore_ascii_case(s) || b.label()[..3] == *s)
            .ok_or_else(|| Error::Domain(format!("unknown band {s}")))
    }
}

/// Transmit power (mW) and consumption (mW) per band, in the column order
/// of [`Band::ALL`].
pub const TX_CONSUMPTION_MW: [(f64, [f64; 4]); 4] = [
    (14.0, [79.2, 100.2, 106.5, 104.4]),
    (10.0, [75.6, 86.4, 99.0, 96.3]),
    (1.0, [43.8, 50.4, 53.4, 52.8]),
    (0.25, [44.1, 52.5, 53.4, 52.8]),
];

/// Power held for one slot, expressed in energy quanta.
pub fn power_to_quanta(milliwatts: f64, slot_length: f64, quantum_joules: f64) -> u32 {
    round_quanta(milliwatts * 1e-3 * slot_length / quantum_joules)
}

/// Quantized consumption table for one band.
///
/// Levels whose transmit power rounds to zero quanta are dropped (they would
/// be indistinguishable from idle yet still pay the circuitry cost). When two
/// levels collapse onto the same transmit quanta the cheaper one is kept.
pub fn device_table(band: Band, slot_length: f64, quantum_joules: f64) -> ConsumptionMap {
    let mut rows: Vec<(u32, u32)> = TX_CONSUMPTION_MW
        .iter()
        .map(|(tx, cons)| {
            (
                power_to_quanta(*tx, slot_length, quantum_joules),
                power_to_quanta(cons[band.column()], slot_length, quantum_joules),
            )
        })
        .filter(|(tx, _)| *tx > 0)
        .collect();
    rows.sort_unstable();
    rows.dedup_by_key(|(tx, _)| *tx);
    ConsumptionMap::DeviceTable { rows }
}
