//! Relative value iteration for the perfect-knowledge average-reward MDP.

use log::warn;

use crate::chain::{Evaluator, Policy};
use crate::error::{Error, Result};
use crate::model::validate_recharge_hypothesis;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RviOptions {
    /// Stop when the span of successive value differences drops below this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Weight of the Bellman update in `h <- (1 - tau) h + tau T h`; values
    /// below one make every policy aperiodic without changing the optimum.
    pub tau: f64,
}

impl Default for RviOptions {
    fn default() -> Self {
        RviOptions {
            tolerance: 1e-9,
            max_sweeps: 100_000,
            tau: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfectSocSolution {
    /// Greedy state policy at convergence.
    pub policy: Policy,
    /// Optimal gain estimated by the iteration.
    pub gain: f64,
    pub sweeps: usize,
    pub span: f64,
}

pub fn solve_perfect_soc(scenario: &Scenario) -> Result<PerfectSocSolution> {
    solve_perfect_soc_with(scenario, RviOptions::default())
}

pub fn solve_perfect_soc_with(scenario: &Scenario, opts: RviOptions) -> Result<PerfectSocSolution> {
    let check = validate_recharge_hypothesis(&scenario.battery, &scenario.arrivals);
    if !check.holds {
        warn!(
            "maximal arrival cannot recharge levels {:?}; the MDP may be multichain",
            check.violating
        );
    }

    let evaluator = Evaluator::new(scenario)?;
    let steps = evaluator.steps();
    let e_max = scenario.e_max();
    let n = e_max as usize + 1;

    // (action, start level after consumption, reward) per state
    let moves: Vec<Vec<(u32, usize, f64)>> = (0..=e_max)
        .map(|e| {
            scenario
                .actions
                .as_slice()
                .iter()
                .map(|&rho| {
                    let (d, r) = evaluator.action(rho)?;
                    let earned = if rho > 0 && d <= e { r } else { 0.0 };
                    Ok((rho, e.saturating_sub(d) as usize, earned))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut h = vec![0.0; n];
    let mut expected = vec![0.0; n];
    let mut greedy = vec![0u32; n];
    let mut span = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        for (a, slot) in expected.iter_mut().enumerate() {
            *slot = steps
                .support()
                .iter()
                .map(|&(b, p)| p * h[steps.next(a as u32, b) as usize])
                .sum();
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut updated = vec![0.0; n];
        for e in 0..n {
            let mut best = (f64::NEG_INFINITY, 0);
            for &(rho, a, r) in &moves[e] {
                let q = r + expected[a];
                if q > best.0 {
                    best = (q, rho);
                }
            }
            greedy[e] = best.1;
            let next = opts.tau * best.0 + (1.0 - opts.tau) * h[e];
            let diff = next - h[e];
            lo = lo.min(diff);
            hi = hi.max(diff);
            updated[e] = next;
        }
        span = hi - lo;
        let offset = updated[0];
        for (hv, u) in h.iter_mut().zip(&updated) {
            *hv = u - offset;
        }
        if span < opts.tolerance {
            return Ok(PerfectSocSolution {
                policy: Policy::State(greedy),
                gain: 0.5 * (lo + hi) / opts.tau,
                sweeps: sweep,
                span,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_sweeps,
        residual: span,
    })
}
