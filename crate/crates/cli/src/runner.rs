//! Experiment drivers: each returns result rows plus auxiliary tables and
//! leaves writing to the caller.

use std::time::Instant;

use ehd_core::chain::{analyze, simulate, Partition, Policy};
use ehd_core::model::{validate_recharge_hypothesis, Band, EfficiencyProfile, RechargeCheck};
use ehd_core::optimize::{
    derive_bp, derive_lcp, search_partition_policy, solve_perfect_soc, upper_bound, BoundReport,
    PerfectSocSolution,
};
use ehd_core::Scenario;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{PolicySource, ScenarioConfig};
use crate::error::{CliError, Result};

/// One line of `results.csv`. Quantities that were not computed are empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub e_max: u32,
    #[serde(rename = "N")]
    pub n_subsets: usize,
    pub policy: String,
    #[serde(rename = "G_analytic")]
    pub g_analytic: Option<f64>,
    #[serde(rename = "G_simulated")]
    pub g_simulated: Option<f64>,
    pub std_error: Option<f64>,
    #[serde(rename = "G_ub")]
    pub g_ub: Option<f64>,
    pub g_ideal: Option<f64>,
    /// Seconds spent producing and evaluating the policy.
    pub wall_time: f64,
    pub error: String,
}

/// A policy written as a table of levels or subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    pub file_name: String,
    pub rows: Vec<PolicyRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRow {
    /// Battery level for state policies, subset index otherwise.
    pub index: usize,
    pub lower: u32,
    pub upper: u32,
    pub action: u32,
    pub consumption: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub scenario: String,
    pub e_max: u32,
    #[serde(rename = "N")]
    pub n_subsets: usize,
    pub policy: String,
    pub frames: u64,
    pub seed: u64,
    #[serde(rename = "G_analytic")]
    pub g_analytic: f64,
    #[serde(rename = "G_simulated")]
    pub g_simulated: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub scenario: String,
    pub e_max: u32,
    pub b: u32,
    pub p_b: f64,
    pub beta_star: f64,
    pub a_star: f64,
    pub quantized_increment: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub policies: Vec<PolicyTable>,
    pub simulations: Vec<SimulationRow>,
    pub bounds: Vec<BoundRow>,
}

/// A produced policy with its evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub name: String,
    pub policy: Policy,
    pub n_subsets: usize,
    pub reward: f64,
}

fn is_lossless(scenario: &Scenario) -> bool {
    scenario.battery.efficiency == EfficiencyProfile::ideal()
}

/// Everything shared by the policies evaluated at one sweep point.
pub struct Point<'a> {
    pub config: &'a ScenarioConfig,
    pub id: String,
    pub scenario: Scenario,
    pub partition: Partition,
    pub bound: BoundReport,
    perfect: Option<PerfectSocSolution>,
}

impl<'a> Point<'a> {
    pub fn new(
        config: &'a ScenarioConfig,
        e_max: u32,
        band: Option<Band>,
        subsets: Option<usize>,
    ) -> Result<Self> {
        let scenario = config.scenario(e_max, band)?;
        let partition = config.partition(e_max, subsets)?;
        let bound = upper_bound(&scenario.battery, &scenario.arrivals, &scenario.reward);
        let id = match band {
            Some(b) if !config.sweep.bands.is_empty() => format!("{}/{}", config.name, b.label()),
            _ => config.name.clone(),
        };
        Ok(Point {
            config,
            id,
            scenario,
            partition,
            bound,
            perfect: None,
        })
    }

    fn e0(&self) -> u32 {
        self.config.initial_level.min(self.scenario.e_max())
    }

    fn perfect(&mut self) -> Result<&PerfectSocSolution> {
        if self.perfect.is_none() {
            self.perfect = Some(solve_perfect_soc(&self.scenario)?);
        }
        Ok(self.perfect.as_ref().expect("just solved"))
    }

    fn evaluate(&self, policy: &Policy) -> Result<f64> {
        Ok(analyze(&self.scenario, policy, self.e0())?.long_run_reward)
    }

    /// Produces the policy of `source` and its long-run reward at this point.
    pub fn produce(&mut self, source: PolicySource) -> Result<Evaluated> {
        let lossless = is_lossless(&self.scenario);
        let n = self.partition.n_subsets();
        let (name, policy, n_subsets) = match source {
            PolicySource::Solve => {
                let name = if lossless { "OP_IP" } else { "OP_RP" };
                let policy = self.perfect()?.policy.clone();
                (name, policy, self.scenario.e_max() as usize + 1)
            }
            PolicySource::Search => {
                let name = if lossless { "OP_II" } else { "OP_RI" };
                let found = search_partition_policy(&self.scenario, &self.partition, self.e0())?;
                (name, found.best_policy, n)
            }
            PolicySource::Lcp => {
                let perfect = self.perfect()?.policy.clone();
                let s = &self.scenario;
                let policy = derive_lcp(&perfect, &s.consumption, &self.partition, &s.actions)?;
                ("LCP", policy, n)
            }
            PolicySource::Bp => {
                let s = &self.scenario;
                let policy = derive_bp(&self.partition, &self.bound, &s.consumption, &s.actions)?;
                ("BP", policy, n)
            }
            PolicySource::Fixed => {
                let actions =
                    self.config
                        .policy
                        .actions
                        .clone()
                        .ok_or_else(|| CliError::Field {
                            field: "policy.actions".into(),
                            message: "required when source = \"fixed\"".into(),
                        })?;
                let policy = Policy::partitioned(self.partition.clone(), actions)?;
                policy.validate(self.scenario.e_max(), &self.scenario.actions)?;
                ("FIXED", policy, n)
            }
            PolicySource::CrossApply => {
                let ideal = self.scenario.with_efficiency(EfficiencyProfile::ideal())?;
                let found = search_partition_policy(&ideal, &self.partition, self.e0())?;
                ("OP_II", found.best_policy, n)
            }
        };
        let reward = self.evaluate(&policy)?;
        Ok(Evaluated {
            name: name.to_string(),
            policy,
            n_subsets,
            reward,
        })
    }

    fn row(&self, n_subsets: usize, policy: &str) -> ResultRow {
        ResultRow {
            scenario: self.id.clone(),
            e_max: self.scenario.e_max(),
            n_subsets,
            policy: policy.to_string(),
            g_analytic: None,
            g_simulated: None,
            std_error: None,
            g_ub: Some(self.bound.g_ub),
            g_ideal: Some(self.bound.g_ideal),
            wall_time: 0.0,
            error: String::new(),
        }
    }

    /// Produces and evaluates `source`, turning failures into an error row.
    pub fn result_row(&mut self, source: PolicySource) -> (ResultRow, Option<Evaluated>) {
        let start = Instant::now();
        match self.produce(source) {
            Ok(ev) => {
                let mut row = self.row(ev.n_subsets, &ev.name);
                row.g_analytic = Some(ev.reward);
                row.wall_time = start.elapsed().as_secs_f64();
                (row, Some(ev))
            }
            Err(e) => {
                let mut row = self.row(self.partition.n_subsets(), source_label(source));
                row.wall_time = start.elapsed().as_secs_f64();
                row.error = e.to_string();
                (row, None)
            }
        }
    }

    pub fn policy_table(&self, file_name: String, policy: &Policy) -> Result<PolicyTable> {
        let cons = &self.scenario.consumption;
        let rows = match policy {
            Policy::State(actions) => actions
                .iter()
                .enumerate()
                .map(|(e, &a)| {
                    Ok(PolicyRow {
                        index: e,
                        lower: e as u32,
                        upper: e as u32,
                        action: a,
                        consumption: cons.consumption(a)?,
                    })
                })
                .collect::<std::result::Result<Vec<_>, ehd_core::Error>>()?,
            Policy::Partitioned { partition, actions } => actions
                .iter()
                .enumerate()
                .map(|(i, &a)| {
                    let members = partition.members(i);
                    Ok(PolicyRow {
                        index: i,
                        lower: *members.start(),
                        upper: *members.end(),
                        action: a,
                        consumption: cons.consumption(a)?,
                    })
                })
                .collect::<std::result::Result<Vec<_>, ehd_core::Error>>()?,
        };
        Ok(PolicyTable { file_name, rows })
    }
}

fn source_label(source: PolicySource) -> &'static str {
    match source {
        PolicySource::Solve => "OP_RP",
        PolicySource::Search => "OP_RI",
        PolicySource::Lcp => "LCP",
        PolicySource::Bp => "BP",
        PolicySource::Fixed => "FIXED",
        PolicySource::CrossApply => "OP_II",
    }
}

fn first_error(rows: &[ResultRow]) -> Result<()> {
    match rows.iter().find(|r| !r.error.is_empty()) {
        Some(r) => Err(CliError::Field {
            field: "policy".into(),
            message: format!("{} failed: {}", r.policy, r.error),
        }),
        None => Ok(()),
    }
}

/// Perfect-knowledge policy of the configured battery; for a lossy battery
/// the lossless reference policy is solved as well.
pub fn run_solve(config: &ScenarioConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let mut point = Point::new(config, config.battery.e_max, None, None)?;
    let (row, ev) = point.result_row(PolicySource::Solve);
    out.rows.push(row);
    first_error(&out.rows)?;
    let ev = ev.expect("row without error carries a policy");
    out.policies
        .push(point.policy_table("policy_solve.csv".into(), &ev.policy)?);

    if !is_lossless(&point.scenario) {
        let mut ideal = config.clone();
        ideal.battery.efficiency = EfficiencyProfile::ideal();
        let mut reference = Point::new(&ideal, ideal.battery.e_max, None, None)?;
        let (row, ev) = reference.result_row(PolicySource::Solve);
        out.rows.push(row);
        first_error(&out.rows)?;
        let ev = ev.expect("row without error carries a policy");
        out.policies
            .push(reference.policy_table("policy_solve_ideal.csv".into(), &ev.policy)?);
    }
    Ok(out)
}

/// Exhaustive partition search for every configured number of subsets.
pub fn run_search(config: &ScenarioConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    for subsets in config.subsets_axis() {
        let mut point = Point::new(config, config.battery.e_max, None, subsets)?;
        let (row, ev) = point.result_row(PolicySource::Search);
        let n = row.n_subsets;
        out.rows.push(row);
        first_error(&out.rows)?;
        let ev = ev.expect("row without error carries a policy");
        out.policies
            .push(point.policy_table(format!("policy_search_N{n}.csv"), &ev.policy)?);
    }
    Ok(out)
}

/// Every requested policy at every (band, e_max, N) point. Points run in
/// parallel; rows come back in sweep order. Failures land in the error
/// column and do not stop the sweep.
pub fn run_sweep(config: &ScenarioConfig) -> Result<RunOutput> {
    let mut points = Vec::new();
    for band in config.band_axis() {
        for &e_max in &config.e_max_axis() {
            for subsets in config.subsets_axis() {
                points.push((band, e_max, subsets));
            }
        }
    }
    let policies = config.policy_axis();
    let rows: Vec<Vec<ResultRow>> = points
        .par_iter()
        .map(
            |&(band, e_max, subsets)| match Point::new(config, e_max, band, subsets) {
                Ok(mut point) => policies.iter().map(|&p| point.result_row(p).0).collect(),
                Err(e) => vec![ResultRow {
                    scenario: config.name.clone(),
                    e_max,
                    n_subsets: subsets.unwrap_or(0),
                    policy: String::new(),
                    g_analytic: None,
                    g_simulated: None,
                    std_error: None,
                    g_ub: None,
                    g_ideal: None,
                    wall_time: 0.0,
                    error: e.to_string(),
                }],
            },
        )
        .collect();
    Ok(RunOutput {
        rows: rows.into_iter().flatten().collect(),
        ..RunOutput::default()
    })
}

/// Monte Carlo run of the configured policy next to its analytic reward.
pub fn run_simulate(config: &ScenarioConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let mut point = Point::new(config, config.battery.e_max, config.base_band(), None)?;
    let start = Instant::now();
    let (mut row, ev) = point.result_row(config.policy.source);
    first_error(std::slice::from_ref(&row))?;
    let ev = ev.expect("row without error carries a policy");
    let report = simulate(
        &point.scenario,
        &ev.policy,
        config.simulation.frames,
        config.seed,
    )?;
    row.g_simulated = Some(report.empirical_reward);
    row.std_error = Some(report.std_error);
    row.wall_time = start.elapsed().as_secs_f64();
    out.simulations.push(SimulationRow {
        scenario: point.id.clone(),
        e_max: point.scenario.e_max(),
        n_subsets: ev.n_subsets,
        policy: ev.name.clone(),
        frames: report.frames,
        seed: report.seed,
        g_analytic: ev.reward,
        g_simulated: report.empirical_reward,
        std_error: report.std_error,
    });
    out.policies
        .push(point.policy_table("policy_simulated.csv".into(), &ev.policy)?);
    out.rows.push(row);
    Ok(out)
}

/// Storage-aware bound for every (band, e_max) point.
pub fn run_bound(config: &ScenarioConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    for band in config.band_axis() {
        for &e_max in &config.e_max_axis() {
            let point = Point::new(config, e_max, band, None)?;
            let start = Instant::now();
            let rep = &point.bound;
            for (b, p_b) in point.scenario.arrivals.pmf().iter().enumerate() {
                out.bounds.push(BoundRow {
                    scenario: point.id.clone(),
                    e_max,
                    b: b as u32,
                    p_b: *p_b,
                    beta_star: rep.beta_star[b],
                    a_star: rep.a_star[b],
                    quantized_increment: rep.quantized_increment[b],
                });
            }
            let mut row = point.row(point.partition.n_subsets(), "bound");
            row.wall_time = start.elapsed().as_secs_f64();
            out.rows.push(row);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Recharge check per (scenario id, e_max).
    pub recharge: Vec<(String, u32, RechargeCheck)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.recharge.iter().all(|(_, _, c)| c.holds)
    }
}

/// Config checks plus the recharge hypothesis at every sweep point.
pub fn run_validate(config: &ScenarioConfig) -> Result<ValidationReport> {
    config.validate()?;
    let mut recharge = Vec::new();
    for band in config.band_axis() {
        for &e_max in &config.e_max_axis() {
            let point = Point::new(config, e_max, band, None)?;
            for subsets in config.subsets_axis() {
                config.partition(e_max, subsets)?;
            }
            let check =
                validate_recharge_hypothesis(&point.scenario.battery, &point.scenario.arrivals);
            recharge.push((point.id.clone(), e_max, check));
        }
    }
    Ok(ValidationReport { recharge })
}
