//! i.i.d. energy arrival statistics over `{0, ..., b_max}` quanta per frame.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

const MEAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalModel {
    pmf: Vec<f64>,
    mean: f64,
}

impl ArrivalModel {
    /// Explicit pmf indexed by arrival size. Entries must be nonnegative and
    /// sum to one within 1e-9; the stored pmf is renormalized exactly.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidModel("empty arrival pmf".into()));
        }
        if let Some(p) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidModel(format!("invalid probability {p}")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!(
                "arrival pmf sums to {total}, expected 1"
            )));
        }
        Ok(Self::normalized(
            pmf.into_iter().map(|p| p / total).collect(),
        ))
    }

    /// All mass on a single arrival size.
    pub fn degenerate(b: u32) -> Self {
        let mut pmf = vec![0.0; b as usize + 1];
        pmf[b as usize] = 1.0;
        ArrivalModel {
            pmf,
            mean: b as f64,
        }
    }

    /// Geometric shape `p^b` restricted to `{0..b_max}` and renormalized, with
    /// the ratio fitted by bisection so the mean equals `mean_target`.
    ///
    /// Targets above `b_max / 2` need a ratio above one, i.e. an increasing pmf.
    pub fn truncated_geometric(mean_target: f64, b_max: u32) -> Result<Self> {
        check_target(mean_target, b_max)?;
        // log weight of b is b * ln(ratio)
        let pmf = fit_mean(mean_target, b_max, (-60.0, 60.0), |b, theta| {
            b as f64 * theta
        })?;
        Ok(Self::normalized(pmf))
    }

    /// Poisson shape `lambda^b / b!` restricted to `{0..b_max}`, with the rate
    /// fitted by bisection so the truncated mean equals `mean_target`.
    pub fn truncated_poisson(mean_target: f64, b_max: u32) -> Result<Self> {
        check_target(mean_target, b_max)?;
        let mut log_factorial = Vec::with_capacity(b_max as usize + 1);
        let mut acc = 0.0;
        for b in 0..=b_max {
            if b > 0 {
                acc += (b as f64).ln();
            }
            log_factorial.push(acc);
        }
        let pmf = fit_mean(mean_target, b_max, (-60.0, 80.0), |b, theta| {
            b as f64 * theta - log_factorial[b as usize]
        })?;
        Ok(Self::normalized(pmf))
    }

    fn normalized(pmf: Vec<f64>) -> Self {
        let mean = pmf.iter().enumerate().map(|(b, p)| b as f64 * p).sum();
        ArrivalModel { pmf, mean }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn b_max(&self) -> u32 {
        (self.pmf.len() - 1) as u32
    }

    /// Mean arrival `b_bar` in quanta per frame.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Arrival sizes with nonzero probability, with their probabilities.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(b, p)| (b as u32, *p))
    }

    pub fn sampler(&self) -> ArrivalSampler {
        ArrivalSampler {
            index: WeightedIndex::new(&self.pmf).expect("validated pmf"),
        }
    }
}

/// Reusable draw table for an [`ArrivalModel`].
#[derive(Debug, Clone)]
pub struct ArrivalSampler {
    index: WeightedIndex<f64>,
}

impl ArrivalSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.index.sample(rng) as u32
    }
}

/// Draws one arrival. Prefer [`ArrivalModel::sampler`] in loops.
pub fn sample_arrival<R: Rng + ?Sized>(model: &ArrivalModel, rng: &mut R) -> u32 {
    model.sampler().sample(rng)
}

fn check_target(mean_target: f64, b_max: u32) -> Result<()> {
    if !(mean_target > 0.0 && mean_target < b_max as f64) {
        return Err(Error::Domain(format!(
            "target mean {mean_target} must lie in (0, {b_max})"
        )));
    }
    Ok(())
}

/// Bisection on a scalar shape parameter `theta`; the truncated mean is
/// increasing in `theta` for both families.
fn fit_mean<F>(target: f64, b_max: u32, bracket: (f64, f64), log_weight: F) -> Result<Vec<f64>>
where
    F: Fn(u32, f64) -> f64,
{
    let pmf_at = |theta: f64| -> Vec<f64> {
        let logs: Vec<f64> = (0..=b_max).map(|b| log_weight(b, theta)).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    };
    let mean_of = |pmf: &[f64]| -> f64 { pmf.iter().enumerate().map(|(b, p)| b as f64 * p).sum() };

    let (mut lo, mut hi) = bracket;
    let mut best = pmf_at(0.5 * (lo + hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        best = pmf_at(mid);
        let m = mean_of(&best);
        if (m - target).abs() <= 1e-13 * b_max as f64 {
            break;
        }
        if m < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let achieved = mean_of(&best);
    if (achieved - target).abs() > MEAN_TOLERANCE {
        return Err(Error::Domain(format!(
            "cannot match mean {target} on 0..={b_max} (reached {achieved})"
        )));
    }
    Ok(best)
}
