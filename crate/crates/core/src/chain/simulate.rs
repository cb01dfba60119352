//! Frame-by-frame Monte Carlo of a policy, used to cross-check the
//! analytic long-run reward.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::analysis::Evaluator;
use super::policy::Policy;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub frames: u64,
    pub empirical_reward: f64,
    /// Batch-means standard error of `empirical_reward`.
    pub std_error: f64,
    pub visit_counts: Vec<u64>,
    pub seed: u64,
}

/// Runs `frames` frames from an empty battery with arrivals drawn from a
/// ChaCha8 stream seeded with `seed`.
///
/// Rewards are autocorrelated through the battery, so the standard error is
/// estimated from `floor(sqrt(frames))` contiguous batch means.
pub fn simulate(
    scenario: &Scenario,
    policy: &Policy,
    frames: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if frames == 0 {
        return Err(Error::Domain("need at least one frame".into()));
    }
    let e_max = scenario.e_max();
    policy.validate(e_max, &scenario.actions)?;
    let evaluator = Evaluator::new(scenario)?;
    let per_state = policy.per_state(e_max);
    let moves: Vec<(u32, f64)> = per_state
        .iter()
        .enumerate()
        .map(|(e, &rho)| {
            let (d, r) = evaluator.action(rho)?;
            let earned = if rho > 0 && d <= e as u32 { r } else { 0.0 };
            Ok((d, earned))
        })
        .collect::<Result<_>>()?;

    let sampler = scenario.arrivals.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = evaluator.steps();

    let n_batches = ((frames as f64).sqrt().floor() as u64).max(1);
    let batch_len = frames / n_batches;
    let mut batch_means = Vec::with_capacity(n_batches as usize);
    let mut batch_sum = 0.0;
    let mut in_batch = 0;

    let mut visit_counts = vec![0u64; e_max as usize + 1];
    let mut total = 0.0;
    let mut e = 0u32;
    for _ in 0..frames {
        visit_counts[e as usize] += 1;
        let (d, r) = moves[e as usize];
        total += r;
        let b = sampler.sample(&mut rng);
        e = steps.next(e.saturating_sub(d), b);

        if (batch_means.len() as u64) < n_batches {
            batch_sum += r;
            in_batch += 1;
            if in_batch == batch_len {
                batch_means.push(batch_sum / batch_len as f64);
                batch_sum = 0.0;
                in_batch = 0;
            }
        }
    }

    let empirical_reward = total / frames as f64;
    let std_error = if batch_means.len() > 1 {
        let k = batch_means.len() as f64;
        let mean = batch_means.iter().sum::<f64>() / k;
        let var = batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    Ok(SimulationReport {
        frames,
        empirical_reward,
        std_error,
        visit_counts,
        seed,
    })
}
