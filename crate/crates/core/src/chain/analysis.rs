//! Markov chain induced by a deterministic policy and its long-run
//! occupation from a given initial charge.
//!
//! The occupation is the Cesàro limit of the state distribution started at
//! `e0`. It is computed exactly: the recurrent classes reachable from `e0`
//! are found with Tarjan's algorithm, each class gets its stationary vector
//! from the GTH elimination, and the classes are mixed with their absorption
//! probabilities. This handles periodic chains and traps without iterating.

use nalgebra::DMatrix;

use super::policy::Policy;
use crate::error::{Error, Result};
use crate::model::{ArrivalModel, BatteryModel, ConsumptionMap, RewardModel};
use crate::scenario::Scenario;

const ROW_SUM_TOLERANCE: f64 = 1e-10;

/// Dense row-major transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn zeros(n: usize) -> Self {
        TransitionMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("transition matrix must be square".into()));
        }
        Ok(TransitionMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    /// Every entry nonnegative and every row summing to one within 1e-10.
    pub fn check_stochastic(&self) -> Result<()> {
        for i in 0..self.n {
            let row = self.row(i);
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NotStochastic { row: i, sum });
            }
        }
        Ok(())
    }

    /// Distribution after one step, `x P`.
    pub fn propagate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (o, p) in out.iter_mut().zip(self.row(i)) {
                    *o += xi * p;
                }
            }
        }
        out
    }
}

/// Next level for every start level (after consumption) and arrival size.
#[derive(Debug, Clone)]
pub struct StepTable {
    e_max: u32,
    b_max: u32,
    next: Vec<u32>,
    support: Vec<(u32, f64)>,
}

impl StepTable {
    pub fn new(battery: &BatteryModel, arrivals: &ArrivalModel) -> Self {
        let b_max = arrivals.b_max();
        let mut next = Vec::with_capacity((battery.e_max as usize + 1) * (b_max as usize + 1));
        for a in 0..=battery.e_max {
            for b in 0..=b_max {
                next.push(
                    battery
                        .battery_step(a, 0, b)
                        .expect("level within capacity"),
                );
            }
        }
        StepTable {
            e_max: battery.e_max,
            b_max,
            next,
            support: arrivals.support().collect(),
        }
    }

    pub fn e_max(&self) -> u32 {
        self.e_max
    }

    /// Level after harvesting `b` from level `a` (no consumption).
    pub fn next(&self, a: u32, b: u32) -> u32 {
        self.next[a as usize * (self.b_max as usize + 1) + b as usize]
    }

    /// Arrival sizes with positive probability.
    pub fn support(&self) -> &[(u32, f64)] {
        &self.support
    }

    /// Fills `row` with the distribution of the next level from start level `a`.
    fn fill_row(&self, a: u32, row: &mut [f64]) {
        row.iter_mut().for_each(|p| *p = 0.0);
        for &(b, p) in &self.support {
            row[self.next(a, b) as usize] += p;
        }
    }
}

/// Transition matrix and per-state expected reward of a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub transition: TransitionMatrix,
    pub state_reward: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainAnalysis {
    pub transition: TransitionMatrix,
    pub state_reward: Vec<f64>,
    /// Long-run occupation of every level given the initial level.
    pub stationary: Vec<f64>,
    pub long_run_reward: f64,
}

/// Per-action consumption and reward, indexed by transmit power.
#[derive(Debug, Clone)]
struct ActionTable {
    entries: Vec<Option<(u32, f64)>>,
}

impl ActionTable {
    fn new(actions: &[u32], cons: &ConsumptionMap, reward: &RewardModel) -> Result<Self> {
        let top = actions.iter().copied().max().unwrap_or(0) as usize;
        let mut entries = vec![None; top + 1];
        for &rho in actions {
            let d = cons.consumption(rho)?;
            let r = if rho == 0 {
                0.0
            } else {
                reward.value(rho as f64)
            };
            entries[rho as usize] = Some((d, r));
        }
        Ok(ActionTable { entries })
    }

    fn get(&self, rho: u32) -> Result<(u32, f64)> {
        self.entries
            .get(rho as usize)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Domain(format!("{rho} is not an admissible action")))
    }
}

/// Evaluates many policies of one scenario, sharing the precomputed battery
/// transitions. Read-only, so it can be shared across threads.
#[derive(Debug, Clone)]
pub struct Evaluator {
    steps: StepTable,
    actions: ActionTable,
}

impl Evaluator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Ok(Evaluator {
            steps: StepTable::new(&scenario.battery, &scenario.arrivals),
            actions: ActionTable::new(
                scenario.actions.as_slice(),
                &scenario.consumption,
                &scenario.reward,
            )?,
        })
    }

    pub fn steps(&self) -> &StepTable {
        &self.steps
    }

    /// Consumption and full reward of action `rho`.
    pub fn action(&self, rho: u32) -> Result<(u32, f64)> {
        self.actions.get(rho)
    }

    /// Chain for a per-state action vector of length `e_max + 1`.
    pub fn chain(&self, per_state: &[u32]) -> Result<Chain> {
        let n = self.steps.e_max as usize + 1;
        if per_state.len() != n {
            return Err(Error::Config(format!(
                "policy covers {} levels, battery has {n}",
                per_state.len()
            )));
        }
        let mut transition = TransitionMatrix::zeros(n);
        let mut state_reward = vec![0.0; n];
        for (e, &rho) in per_state.iter().enumerate() {
            let (d, r) = self.actions.get(rho)?;
            let e = e as u32;
            if rho > 0 && d <= e {
                state_reward[e as usize] = r;
            }
            self.steps
                .fill_row(e.saturating_sub(d), transition.row_mut(e as usize));
        }
        Ok(Chain {
            transition,
            state_reward,
        })
    }

    /// Long-run average reward of a per-state action vector from level `e0`.
    pub fn long_run_reward(&self, per_state: &[u32], e0: u32) -> Result<f64> {
        let chain = self.chain(per_state)?;
        let (g, _) = long_run_average(&chain.transition, &chain.state_reward, e0)?;
        Ok(g)
    }
}

/// Transition matrix and reward vector of `policy` in `scenario`.
pub fn build_chain(scenario: &Scenario, policy: &Policy) -> Result<Chain> {
    policy.validate(scenario.e_max(), &scenario.actions)?;
    Evaluator::new(scenario)?.chain(&policy.per_state(scenario.e_max()))
}

/// Builds and solves the chain of `policy` started at `e0`.
pub fn analyze(scenario: &Scenario, policy: &Policy, e0: u32) -> Result<ChainAnalysis> {
    let chain = build_chain(scenario, policy)?;
    let (long_run_reward, stationary) =
        long_run_average(&chain.transition, &chain.state_reward, e0)?;
    Ok(ChainAnalysis {
        transition: chain.transition,
        state_reward: chain.state_reward,
        stationary,
        long_run_reward,
    })
}

/// Long-run average reward and occupation of the chain started at `e0`.
pub fn long_run_average(
    transition: &TransitionMatrix,
    state_reward: &[f64],
    e0: u32,
) -> Result<(f64, Vec<f64>)> {
    let n = transition.size();
    if state_reward.len() != n {
        return Err(Error::Config(format!(
            "{} rewards for {n} states",
            state_reward.len()
        )));
    }
    if e0 as usize >= n {
        return Err(Error::Domain(format!("initial level {e0} outside 0..{n}")));
    }
    transition.check_stochastic()?;
    let occupation = limiting_occupation(transition, e0 as usize)?;
    let g = occupation
        .iter()
        .zip(state_reward)
        .map(|(p, r)| p * r)
        .sum();
    Ok((g, occupation))
}

/// Running-average power iteration from the point mass at `e0`, stopped when
/// successive averages differ by less than `tolerance` in L1.
///
/// Slow (the averages move as `1/k`), kept as an independent check of
/// [`long_run_average`].
pub fn cesaro_occupation(
    transition: &TransitionMatrix,
    e0: u32,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    transition.check_stochastic()?;
    let n = transition.size();
    let mut x = vec![0.0; n];
    x[e0 as usize] = 1.0;
    let mut sum = x.clone();
    let mut avg = x.clone();
    let mut residual = f64::INFINITY;
    for k in 2..=max_iterations {
        x = transition.propagate(&x);
        for (s, xi) in sum.iter_mut().zip(&x) {
            *s += xi;
        }
        let next: Vec<f64> = sum.iter().map(|s| s / k as f64).collect();
        residual = next.iter().zip(&avg).map(|(a, b)| (a - b).abs()).sum();
        avg = next;
        if residual < tolerance {
            return Ok(avg);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual,
    })
}

fn adjacency(transition: &TransitionMatrix) -> Vec<Vec<usize>> {
    (0..transition.size())
        .map(|i| {
            transition
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// Strongly connected components reachable from `root` (iterative Tarjan).
/// Returns the component id of every node (`usize::MAX` when unreachable)
/// and the number of components.
fn components_from(adj: &[Vec<usize>], root: usize) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut calls: Vec<(usize, usize)> = vec![(root, 0)];
    let mut counter = 0;
    let mut n_comp = 0;
    index[root] = counter;
    low[root] = counter;
    counter += 1;
    stack.push(root);
    on_stack[root] = true;

    while let Some(&mut (v, ref mut edge)) = calls.last_mut() {
        if let Some(&w) = adj[v].get(*edge) {
            *edge += 1;
            if index[w] == UNSEEN {
                index[w] = counter;
                low[w] = counter;
                counter += 1;
                stack.push(w);
                on_stack[w] = true;
                calls.push((w, 0));
            } else if on_stack[w] {
                low[v] = low[v].min(index[w]);
            }
        } else {
            calls.pop();
            if let Some(&(u, _)) = calls.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = n_comp;
                    if w == v {
                        break;
                    }
                }
                n_comp += 1;
            }
        }
    }
    (comp, n_comp)
}

/// Stationary vector of an irreducible stochastic matrix (GTH elimination).
fn gth_stationary(mut a: Vec<f64>, m: usize) -> Vec<f64> {
    for k in (1..m).rev() {
        let s: f64 = a[k * m..k * m + k].iter().sum();
        for i in 0..k {
            let f = a[i * m + k] / s;
            a[i * m + k] = f;
            if f != 0.0 {
                for j in 0..k {
                    a[i * m + j] += f * a[k * m + j];
                }
            }
        }
    }
    let mut pi = vec![0.0; m];
    pi[0] = 1.0;
    for j in 1..m {
        pi[j] = (0..j).map(|i| pi[i] * a[i * m + j]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    pi
}

fn limiting_occupation(transition: &TransitionMatrix, e0: usize) -> Result<Vec<f64>> {
    let n = transition.size();
    let adj = adjacency(transition);
    let (comp, n_comp) = components_from(&adj, e0);

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_comp];
    for (v, &c) in comp.iter().enumerate() {
        if c != usize::MAX {
            members[c].push(v);
        }
    }
    let closed: Vec<usize> = (0..n_comp)
        .filter(|&c| {
            members[c]
                .iter()
                .all(|&v| adj[v].iter().all(|&w| comp[w] == c))
        })
        .collect();

    let class_weights: Vec<(usize, f64)> = if closed.contains(&comp[e0]) {
        vec![(comp[e0], 1.0)]
    } else if closed.len() == 1 {
        vec![(closed[0], 1.0)]
    } else {
        absorption_from(transition, &comp, &members, &closed, e0)?
    };

    let mut occupation = vec![0.0; n];
    for (c, weight) in class_weights {
        if weight == 0.0 {
            continue;
        }
        let states = &members[c];
        let m = states.len();
        let mut sub = Vec::with_capacity(m * m);
        for &i in states {
            let row = transition.row(i);
            sub.extend(states.iter().map(|&j| row[j]));
        }
        for (&s, p) in states.iter().zip(gth_stationary(sub, m)) {
            occupation[s] += weight * p;
        }
    }
    Ok(occupation)
}

/// Probability of ending in each closed class when starting from transient `e0`.
fn absorption_from(
    transition: &TransitionMatrix,
    comp: &[usize],
    members: &[Vec<usize>],
    closed: &[usize],
    e0: usize,
) -> Result<Vec<(usize, f64)>> {
    let transient: Vec<usize> = members
        .iter()
        .enumerate()
        .filter(|(c, _)| !closed.contains(c))
        .flat_map(|(_, m)| m.iter().copied())
        .collect();
    let pos = |v: usize| transient.iter().position(|&t| t == v);
    let t = transient.len();
    let mut lhs = DMatrix::<f64>::identity(t, t);
    let mut rhs = DMatrix::<f64>::zeros(t, closed.len());
    for (r, &i) in transient.iter().enumerate() {
        for (j, &p) in transition.row(i).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if let Some(col) = closed.iter().position(|&c| c == comp[j]) {
                rhs[(r, col)] += p;
            } else if let Some(k) = pos(j) {
                lhs[(r, k)] -= p;
            }
        }
    }
    let solution = lhs.lu().solve(&rhs).ok_or(Error::NotConverged {
        iterations: 0,
        residual: f64::NAN,
    })?;
    let row = pos(e0).expect("initial level is transient");
    Ok(closed
        .iter()
        .enumerate()
        .map(|(col, &c)| (c, solution[(row, col)]))
        .collect())
}
