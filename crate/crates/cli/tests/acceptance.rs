//! Acceptance suite. Runs every check at its stated tolerance and prints one
//! PASS/FAIL line per check.
//!
//! Two checks are known to fail for reasons that lie in the model rather
//! than the implementation (see the README section on known deviations).
//! They are still evaluated and reported as FAIL; the process only exits
//! with an error when a check disagrees with its expected status, so a
//! regression elsewhere or a known failure that starts passing is caught.

use std::process::ExitCode;
use std::time::Instant;

use ehd_cli::presets;
use ehd_cli::runner::{run_sweep, ResultRow};
use ehd_core::chain::{analyze, simulate, Partition, Policy};
use ehd_core::model::{
    validate_recharge_hypothesis, ActionSet, ArrivalModel, BatteryModel, ConsumptionMap,
    EfficiencyProfile, RewardModel, StorageDynamics,
};
use ehd_core::optimize::{
    beta_star, derive_bp, derive_lcp, search_partition_policy, solve_perfect_soc, upper_bound,
};
use ehd_core::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Checks whose failure is explained and expected.
const KNOWN_RED: [u32; 2] = [4, 9];

type Check = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn g(s: &Scenario, p: &Policy) -> f64 {
    analyze(s, p, 0).unwrap().long_run_reward
}

fn capacitor(e_max: u32, beta_nl: f64, dynamics: StorageDynamics) -> BatteryModel {
    BatteryModel::new(e_max, EfficiencyProfile::QuadraticCapacitor { beta_nl })
        .unwrap()
        .with_dynamics(dynamics)
}

fn storage_curve() -> Outcome {
    let b = Scenario::baseline().battery;
    let y = b.integrate_frame(0.0, 50).unwrap();
    let step = b.battery_step(0, 0, 50).unwrap();
    outcome(
        (y - 6.3).abs() <= 0.05 && step == 6,
        format!("y_T(0, 50) = {y:.4}, step = {step}"),
    )
}

fn baseline_rewards() -> Outcome {
    let s = Scenario::baseline();
    let perfect = g(&s, &solve_perfect_soc(&s).unwrap().policy);
    let search = |s: &Scenario, n| {
        search_partition_policy(s, &Partition::uniform(100, n).unwrap(), 0)
            .unwrap()
            .best_reward
    };
    let n1 = search(&s, 1);
    let n2 = search(&s, 2);
    let coarse = s.with_actions(ActionSet::range(50, 1)).unwrap();
    let n3 = search(&coarse, 3);
    let within = [(perfect, 0.1714), (n3, 0.1670), (n2, 0.1655), (n1, 0.0488)]
        .iter()
        .all(|&(x, p)| rel(x, p) <= 0.05);
    let ordered = n1 < n2 && n2 <= n3 && n3 <= perfect;
    outcome(
        within && ordered,
        format!("perfect {perfect:.4}, N=3 {n3:.4}, N=2 {n2:.4}, N=1 {n1:.4}"),
    )
}

fn zero_reward_trap() -> Outcome {
    let real = Scenario::baseline();
    let ideal = real.with_efficiency(EfficiencyProfile::ideal()).unwrap();
    let op_ii = search_partition_policy(&ideal, &Partition::uniform(100, 2).unwrap(), 0)
        .unwrap()
        .best_policy;
    let analytic = g(&real, &op_ii);
    let sim = simulate(&real, &op_ii, 100_000, 11).unwrap();
    outcome(
        analytic == 0.0 && sim.empirical_reward == 0.0,
        format!(
            "OP_II {:?}: G = {analytic}, simulated {}",
            op_ii
                .per_state(100)
                .iter()
                .collect::<std::collections::BTreeSet<_>>(),
            sim.empirical_reward
        ),
    )
}

/// Random capacitor scenario satisfying the recharge hypothesis.
fn random_scenario(rng: &mut ChaCha8Rng, e_range: (u32, u32), coarse: bool) -> Scenario {
    loop {
        let e_max = rng.random_range(e_range.0..=e_range.1);
        let beta_nl = 1.0 + rng.random_range(0.01..=2.0);
        let b_max = rng.random_range(5..=60u32);
        let mean = b_max as f64 * rng.random_range(0.1..0.7);
        let lambda = 10f64.powf(rng.random_range(-3.0..0.0));
        let arrivals = if rng.random_bool(0.5) {
            ArrivalModel::truncated_geometric(mean, b_max)
        } else {
            ArrivalModel::truncated_poisson(mean, b_max)
        }
        .unwrap();
        let dynamics = if rng.random_bool(0.5) {
            StorageDynamics::PerQuantum
        } else {
            StorageDynamics::Ode
        };
        let battery = capacitor(e_max, beta_nl, dynamics);
        if !validate_recharge_hypothesis(&battery, &arrivals).holds {
            continue;
        }
        let step = if coarse { (e_max / 20).max(1) } else { 1 };
        return Scenario::new(
            battery,
            arrivals,
            ConsumptionMap::Identity,
            RewardModel::LogSnr { lambda },
            ActionSet::range(e_max, step),
        )
        .unwrap();
    }
}

fn bound_dominance() -> Outcome {
    const SCENARIOS: usize = 50;
    const SLACK: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut policy_viol, mut bound_viol, mut ideal_viol, mut quantized_viol) = (0, 0, 0, 0);
    let mut worst = (0.0f64, String::new());
    for _ in 0..SCENARIOS {
        let s = random_scenario(&mut rng, (10, 300), true);
        let e_max = s.e_max();
        let perfect = solve_perfect_soc(&s).unwrap().policy;
        let g_perfect = g(&s, &perfect);
        let bound = upper_bound(&s.battery, &s.arrivals, &s.reward);
        let p2 = Partition::uniform(e_max, 2).unwrap();
        let candidates = [
            search_partition_policy(&s, &p2, 0).unwrap().best_policy,
            search_partition_policy(&s, &Partition::uniform(e_max, 1).unwrap(), 0)
                .unwrap()
                .best_policy,
            derive_lcp(&perfect, &s.consumption, &p2, &s.actions).unwrap(),
            derive_bp(&p2, &bound, &s.consumption, &s.actions).unwrap(),
        ];
        policy_viol += candidates
            .iter()
            .filter(|p| g(&s, p) > g_perfect + SLACK)
            .count();
        if g_perfect > bound.g_ub + SLACK {
            bound_viol += 1;
            let excess = g_perfect / bound.g_ub - 1.0;
            if excess > worst.0 {
                worst = (excess, format!("e_max {e_max}, {:?}", s.battery.dynamics));
            }
        }
        ideal_viol += usize::from(bound.g_ub > bound.g_ideal + SLACK);
        quantized_viol += usize::from(g_perfect > bound.g_ub_quantized + SLACK);
    }
    outcome(
        policy_viol + bound_viol + ideal_viol == 0,
        format!(
            "{SCENARIOS} scenarios: policy > perfect {policy_viol}, perfect > G_ub {bound_viol} \
             (worst +{:.2}% at {}), G_ub > g(b) {ideal_viol}; perfect > rounded-storage bound {quantized_viol}",
            100.0 * worst.0,
            worst.1
        ),
    )
}

fn constant_efficiency() -> Outcome {
    let arrivals = ArrivalModel::truncated_geometric(20.0, 50).unwrap();
    let reward = RewardModel::LogSnr { lambda: 0.01 };
    let mut worst_beta = 0.0f64;
    let mut worst_g = 0.0f64;
    for eta in [0.3, 0.6, 0.85, 1.0] {
        for dynamics in [StorageDynamics::Ode, StorageDynamics::PerQuantum] {
            let battery = BatteryModel::new(100, EfficiencyProfile::Constant { eta })
                .unwrap()
                .with_dynamics(dynamics);
            for b in 0..=50 {
                worst_beta = worst_beta.max((beta_star(&battery, b).1 - eta * b as f64).abs());
            }
            let rep = upper_bound(&battery, &arrivals, &reward);
            worst_g = worst_g.max((rep.g_ub - reward.value(eta * arrivals.mean())).abs());
        }
    }
    outcome(
        worst_beta <= 1e-9 && worst_g <= 1e-9,
        format!("max |beta* - eta b| = {worst_beta:.1e}, max |G_ub - g(eta b)| = {worst_g:.1e}"),
    )
}

fn asymptotic_bound() -> Outcome {
    let s = Scenario::baseline();
    let battery = capacitor(1000, 1.05, StorageDynamics::PerQuantum);
    let rep = upper_bound(&battery, &s.arrivals, &s.reward);
    let gap = 1.0 - rep.g_ub / rep.g_ideal;
    outcome(
        gap.abs() <= 0.01,
        format!(
            "G_ub = {:.5}, g(b) = {:.5}, gap {:.3}%",
            rep.g_ub,
            rep.g_ideal,
            100.0 * gap
        ),
    )
}

fn capacitor_closed_form(e_max: u32, beta_nl: f64, e0: f64, b: f64) -> f64 {
    let m = e_max as f64 / 2.0;
    let c = m * beta_nl.sqrt();
    let y = m + c * (((e0 - m) / c).atanh() + b / (m * beta_nl.sqrt())).tanh();
    y.min(e_max as f64)
}

fn oracle_equivalence() -> Outcome {
    // (a) singleton search against value iteration
    let mut worst_a = 0.0f64;
    let cases: [(u32, &[u32]); 5] = [
        (3, &[0, 1, 2, 3]),
        (6, &[0, 1, 3]),
        (10, &[0, 2]),
        (14, &[0, 3]),
        (20, &[0, 4]),
    ];
    for (i, (e_max, actions)) in cases.into_iter().enumerate() {
        let s = Scenario::new(
            capacitor(e_max, 1.2 + 0.3 * i as f64, StorageDynamics::PerQuantum),
            ArrivalModel::truncated_geometric(3.0 + i as f64, 8 + i as u32).unwrap(),
            ConsumptionMap::Identity,
            RewardModel::LogSnr { lambda: 0.2 },
            ActionSet::new(actions.to_vec()).unwrap(),
        )
        .unwrap();
        let searched = search_partition_policy(&s, &Partition::singletons(e_max), 0)
            .unwrap()
            .best_reward;
        let solved = g(&s, &solve_perfect_soc(&s).unwrap().policy);
        worst_a = worst_a.max((searched - solved).abs());
    }

    // (b) toy problem against enumeration of its 8 deterministic policies
    let toy = Scenario::new(
        BatteryModel::new(2, EfficiencyProfile::Constant { eta: 0.8 }).unwrap(),
        ArrivalModel::from_pmf(vec![0.5, 0.3, 0.2]).unwrap(),
        ConsumptionMap::Identity,
        RewardModel::LogSnr { lambda: 1.0 },
        ActionSet::new(vec![0, 1]).unwrap(),
    )
    .unwrap();
    let brute = (0..8u32)
        .map(|code| {
            g(
                &toy,
                &Policy::State((0..3).map(|e| (code >> e) & 1).collect()),
            )
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let solved = g(&toy, &solve_perfect_soc(&toy).unwrap().policy);
    let err_b = (brute - solved).abs();

    // (c) RK4 against the closed-form capacitor flow
    let battery = capacitor(100, 1.05, StorageDynamics::Ode);
    let err_c = (0..100)
        .map(|i| {
            let e0 = 100.0 * i as f64 / 99.0;
            let b = (i % 51) as u32;
            (battery.integrate_frame(e0, b).unwrap()
                - capacitor_closed_form(100, 1.05, e0, b as f64))
            .abs()
        })
        .fold(0.0, f64::max);

    outcome(
        worst_a <= 1e-8 && err_b <= 1e-8 && err_c <= 1e-6,
        format!("(a) {worst_a:.1e}  (b) {err_b:.1e}  (c) {err_c:.1e}"),
    )
}

fn monte_carlo() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for k in 0..10u64 {
        let s = random_scenario(&mut rng, (10, 80), false);
        let policy = if k % 2 == 0 {
            solve_perfect_soc(&s).unwrap().policy
        } else {
            let p2 = Partition::uniform(s.e_max(), 2).unwrap();
            let lo = rng.random_range(0..=s.e_max() / 4);
            let hi = rng.random_range(lo..=s.e_max() / 2);
            Policy::partitioned(p2, vec![lo, hi]).unwrap()
        };
        let analytic = g(&s, &policy);
        let sim = simulate(&s, &policy, 1_000_000, 1000 + k).unwrap();
        let z = if sim.std_error > 0.0 {
            (sim.empirical_reward - analytic).abs() / sim.std_error
        } else if sim.empirical_reward == analytic {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    outcome(
        worst <= 3.0,
        format!("10 scenarios, largest |error| = {worst:.2} SE"),
    )
}

fn rows_of<'a>(rows: &'a [ResultRow], policy: &str) -> impl Iterator<Item = &'a ResultRow> {
    let policy = policy.to_string();
    rows.iter().filter(move |r| r.policy == policy)
}

fn reward_at(rows: &[ResultRow], scenario: &str, e_max: u32, policy: &str) -> f64 {
    rows_of(rows, policy)
        .find(|r| r.scenario == scenario && r.e_max == e_max)
        .and_then(|r| r.g_analytic)
        .unwrap_or_else(|| panic!("{scenario} {e_max} {policy} missing"))
}

fn figure_shapes() -> Outcome {
    let fig4 = presets::fig4();
    let rows = run_sweep(&fig4).unwrap().rows;
    let mut lcp_small = true;
    let mut lcp_large = true;
    let mut bp = true;
    let mut failing_large = Vec::new();
    for &e_max in &presets::FIG4_E_MAX {
        let ri = reward_at(&rows, "fig4", e_max, "OP_RI");
        let lcp = reward_at(&rows, "fig4", e_max, "LCP");
        let b = reward_at(&rows, "fig4", e_max, "BP");
        if e_max <= 30 && rel(lcp, ri) > 0.25 {
            lcp_small = false;
        }
        if e_max >= 200 && lcp >= 0.25 * ri {
            lcp_large = false;
            failing_large.push(format!("{e_max}: {:.0}%", 100.0 * lcp / ri));
        }
        if rel(b, ri) > 0.15 {
            bp = false;
        }
    }

    let fig5 = presets::fig5();
    let rows5 = run_sweep(&fig5).unwrap().rows;
    let mut band = true;
    for &e_max in &presets::FIG5_E_MAX {
        let best = reward_at(&rows5, "fig5/315MHz", e_max, "OP_RI");
        for other in ["433MHz", "868MHz", "915MHz"] {
            if reward_at(&rows5, &format!("fig5/{other}"), e_max, "OP_RI") > best {
                band = false;
            }
        }
    }
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    outcome(
        lcp_small && lcp_large && bp && band,
        format!(
            "LCP near OP_RI at e_max<=30 {}; LCP < 25% of OP_RI at e_max>=200 {}{}; \
             BP within 15% {}; 315MHz best {}",
            mark(lcp_small),
            mark(lcp_large),
            if failing_large.is_empty() {
                String::new()
            } else {
                format!(" (LCP/OP_RI at {})", failing_large.join(", "))
            },
            mark(bp),
            mark(band)
        ),
    )
}

fn main() -> ExitCode {
    let checks: [Check; 9] = [
        (1, "storage curve regression", storage_curve),
        (2, "baseline reward regression", baseline_rewards),
        (3, "zero-reward trap", zero_reward_trap),
        (4, "bound dominance", bound_dominance),
        (5, "constant-efficiency analytics", constant_efficiency),
        (6, "asymptotic bound collapse", asymptotic_bound),
        (7, "oracle equivalence", oracle_equivalence),
        (8, "Monte Carlo consistency", monte_carlo),
        (9, "sweep shapes", figure_shapes),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check) in checks {
        let start = Instant::now();
        let result = check();
        let expected_red = KNOWN_RED.contains(&id);
        let status = match (result.pass, expected_red) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (expected FAIL)",
        };
        if result.pass == expected_red {
            unexpected.push(id);
        }
        println!(
            "[{id}] {name}: {status} -- {} [{:.1}s]",
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected status for checks {unexpected:?}");
        ExitCode::FAILURE
    }
}
