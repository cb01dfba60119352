//! Storage-aware throughput upper bound.
//!
//! `beta_star(b)` is the largest increment a single frame can store from an
//! arrival of `b` quanta, over every continuous starting level. Averaging it
//! over the arrival pmf gives the storable mean `b_bar_s`; by energy
//! causality and concavity no policy beats `g(b_bar_s)`.

use serde::Serialize;

use crate::model::{ArrivalModel, BatteryModel, RewardModel, StorageDynamics};

/// Grid points per quantum used to seed the maximization.
const GRID_PER_QUANTUM: u32 = 8;
const GOLDEN_ITERATIONS: usize = 80;
/// Narrowest constant piece the per-quantum sweep steps over.
const MIN_PIECE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub beta_star: Vec<f64>,
    pub a_star: Vec<f64>,
    pub b_bar_s: f64,
    pub g_ub: f64,
    /// Lossless bound `g(b_bar)`.
    pub g_ideal: f64,
    /// Largest rounded increment over integer starting levels, per arrival.
    pub quantized_increment: Vec<f64>,
    pub b_bar_q: f64,
    /// `g(b_bar_q)`: holds for the rounded chain, where a frame can keep up to
    /// half a quantum more than `beta_star`.
    pub g_ub_quantized: f64,
}

/// Maximizer `a*` and maximum `beta*` of the stored increment
/// `y_T(a, b) - a` over `a` in `[0, e_max]`. The increment is computed
/// without the capacity limit so overflow is not counted as a loss.
pub fn beta_star(battery: &BatteryModel, b: u32) -> (f64, f64) {
    if battery.dynamics == StorageDynamics::PerQuantum {
        return per_quantum_beta_star(battery, b);
    }
    let increment = |a: f64| battery.integrate_unsaturated(a, b) - a;
    let e_max = battery.e_max as f64;
    let points = battery.e_max * GRID_PER_QUANTUM;
    let h = e_max / points as f64;

    let mut best = (0.0, increment(0.0));
    for i in 1..=points {
        let a = i as f64 * h;
        let v = increment(a);
        if v > best.1 {
            best = (a, v);
        }
    }

    // golden-section refinement inside the neighbouring grid cells
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(e_max));
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = increment(x1);
    let mut f2 = increment(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 > best.1 {
            best = (x1, f1);
        }
        if f2 > best.1 {
            best = (x2, f2);
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = increment(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = increment(x2);
        }
    }
    best
}

/// Per-quantum storage adds `eta(Round(y))` for each quantum, so the increment
/// is piecewise constant in `a` and only changes where some intermediate level
/// reaches a half-integer. Walking those breakpoints from `a = 0` and scoring
/// the left end of every piece gives the exact maximum.
fn per_quantum_beta_star(battery: &BatteryModel, b: u32) -> (f64, f64) {
    let e_max = battery.e_max as f64;
    let eta = |y: f64| battery.efficiency.extended(y, battery.e_max);
    let mut best = (0.0, 0.0);
    let mut a = 0.0;
    while a <= e_max {
        let mut y = a;
        let mut gap = f64::INFINITY;
        for _ in 0..b {
            let level = y.round();
            gap = gap.min(level + 0.5 - y);
            y += eta(level);
        }
        if y - a > best.1 {
            best = (a, y - a);
        }
        if !gap.is_finite() {
            break;
        }
        // floating-point noise can leave a level a hair below its breakpoint
        a += gap.max(MIN_PIECE);
    }
    best
}

/// Largest stored increment the quantized chain can realize from `b`
/// arriving quanta: `Round(y_T(a, b)) - a` maximized over integer `a`.
pub fn quantized_increment(battery: &BatteryModel, b: u32) -> f64 {
    (0..=battery.e_max)
        .map(|a| {
            let a = a as f64;
            battery.integrate_unsaturated(a, b).round() - a
        })
        .fold(0.0, f64::max)
}

pub fn upper_bound(
    battery: &BatteryModel,
    arrivals: &ArrivalModel,
    reward: &RewardModel,
) -> BoundReport {
    let (a_star, beta_star): (Vec<f64>, Vec<f64>) = (0..=arrivals.b_max())
        .map(|b| beta_star(battery, b))
        .unzip();
    let b_bar_s = arrivals
        .pmf()
        .iter()
        .zip(&beta_star)
        .map(|(p, beta)| p * beta)
        .sum();
    let quantized: Vec<f64> = (0..=arrivals.b_max())
        .map(|b| quantized_increment(battery, b))
        .collect();
    let b_bar_q = arrivals
        .pmf()
        .iter()
        .zip(&quantized)
        .map(|(p, q)| p * q)
        .sum();
    BoundReport {
        g_ub: reward.value(b_bar_s),
        g_ub_quantized: reward.value(b_bar_q),
        quantized_increment: quantized,
        b_bar_q,
        g_ideal: reward.value(arrivals.mean()),
        beta_star,
        a_star,
        b_bar_s,
    }
}
