//! Independent reference computations checked against the library.

use approx::assert_abs_diff_eq;
use ehd_core::chain::{analyze, Partition, Policy};
use ehd_core::model::{
    ActionSet, ArrivalModel, BatteryModel, ConsumptionMap, EfficiencyProfile, RewardModel,
    StorageDynamics,
};
use ehd_core::optimize::{search_partition_policy, solve_perfect_soc};
use ehd_core::Scenario;

/// Level after one frame of the continuous capacitor flow
/// `dy/ds = b (1 - (y - m)^2 / (beta m^2))`, `s` in `[0, 1]`, stopped at `e_max`.
fn capacitor_closed_form(e_max: u32, beta_nl: f64, e0: f64, b: f64) -> f64 {
    let m = e_max as f64 / 2.0;
    let c = m * beta_nl.sqrt();
    let y = m + c * (((e0 - m) / c).atanh() + b / (m * beta_nl.sqrt())).tanh();
    y.min(e_max as f64)
}

#[test]
fn rk4_matches_closed_form_capacitor_flow() {
    for (e_max, beta_nl) in [(100, 1.05), (37, 2.5), (300, 1.3)] {
        let battery =
            BatteryModel::new(e_max, EfficiencyProfile::QuadraticCapacitor { beta_nl }).unwrap();
        for i in 0..100 {
            let e0 = e_max as f64 * i as f64 / 99.0;
            let b = (i % 51) as u32;
            let expected = capacitor_closed_form(e_max, beta_nl, e0, b as f64);
            let got = battery.integrate_frame(e0, b).unwrap();
            assert_abs_diff_eq!(got, expected, epsilon = 1e-6);
        }
    }
}

/// Stationary vector of an irreducible-on-its-closed-class chain, by
/// Gaussian elimination on `pi (P - I) = 0`, `sum pi = 1`.
fn stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (row, values) in a.iter_mut().enumerate() {
            if row != col {
                let f = values[col] / pivot_row[col];
                for (v, p) in values.iter_mut().zip(&pivot_row).skip(col) {
                    *v -= f * p;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

#[test]
fn value_iteration_matches_brute_force_on_toy_problem() {
    let pmf = vec![0.5, 0.3, 0.2];
    let reward = RewardModel::LogSnr { lambda: 1.0 };
    let battery = BatteryModel::new(2, EfficiencyProfile::Constant { eta: 0.8 }).unwrap();
    let scenario = Scenario::new(
        battery.clone(),
        ArrivalModel::from_pmf(pmf.clone()).unwrap(),
        ConsumptionMap::Identity,
        reward.clone(),
        ActionSet::new(vec![0, 1]).unwrap(),
    )
    .unwrap();

    let mut best = f64::NEG_INFINITY;
    for code in 0..8u32 {
        let actions: Vec<u32> = (0..3).map(|e| (code >> e) & 1).collect();
        let p: Vec<Vec<f64>> = (0..3u32)
            .map(|e| {
                let mut row = vec![0.0; 3];
                for (b, &pb) in pmf.iter().enumerate() {
                    let next = battery
                        .battery_step(e, actions[e as usize], b as u32)
                        .unwrap();
                    row[next as usize] += pb;
                }
                row
            })
            .collect();
        let pi = stationary(&p);
        let g: f64 = (0..3)
            .map(|e| {
                let rho = actions[e];
                if rho > 0 && rho as usize <= e {
                    pi[e] * reward.value(rho as f64)
                } else {
                    0.0
                }
            })
            .sum();
        let lib = analyze(&scenario, &Policy::State(actions), 0)
            .unwrap()
            .long_run_reward;
        assert_abs_diff_eq!(lib, g, epsilon = 1e-12);
        best = best.max(g);
    }

    let solved = solve_perfect_soc(&scenario).unwrap();
    let g = analyze(&scenario, &solved.policy, 0)
        .unwrap()
        .long_run_reward;
    assert_abs_diff_eq!(g, best, epsilon = 1e-9);
    assert_abs_diff_eq!(solved.gain, best, epsilon = 1e-7);
}

#[test]
fn singleton_search_agrees_with_value_iteration() {
    for (e_max, beta_nl, mean, b_max) in [(3, 1.5, 2.0, 4), (5, 1.2, 3.0, 6), (6, 2.0, 2.5, 5)] {
        let scenario = Scenario::new(
            BatteryModel::new(e_max, EfficiencyProfile::QuadraticCapacitor { beta_nl })
                .unwrap()
                .with_dynamics(StorageDynamics::PerQuantum),
            ArrivalModel::truncated_geometric(mean, b_max).unwrap(),
            ConsumptionMap::Identity,
            RewardModel::LogSnr { lambda: 0.3 },
            ActionSet::range(e_max, 1),
        )
        .unwrap();
        let searched =
            search_partition_policy(&scenario, &Partition::singletons(e_max), 0).unwrap();
        let solved = solve_perfect_soc(&scenario).unwrap();
        let g = analyze(&scenario, &solved.policy, 0)
            .unwrap()
            .long_run_reward;
        assert_abs_diff_eq!(searched.best_reward, g, epsilon = 1e-8);
    }
}

#[test]
fn baseline_perfect_knowledge_reward() {
    let s = Scenario::baseline();
    let solved = solve_perfect_soc(&s).unwrap();
    let g = analyze(&s, &solved.policy, 0).unwrap().long_run_reward;
    assert!((g / 0.1714 - 1.0).abs() < 0.01, "G = {g}");
}
