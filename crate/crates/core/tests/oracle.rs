//! Cross-checks of the exact solver against independent oracles: exhaustive
//! path enumeration on small instances and Monte-Carlo simulation on larger
//! ones, plus conservation and distribution checks on the simulator itself.

mod common;

use survival_mdp::solver::{solve, ConstPolicy};
use survival_mdp::{scenarios, sim};

#[test]
fn dp_matches_exhaustive_enumeration() {
    let bad = common::enumeration_mismatches(0..60);
    assert!(bad.is_empty(), "{bad:?}");
    // the coin problem at every start budget on its lattice
    let g = scenarios::gambler(1, 3);
    let tables = solve(&g);
    for b in 1..=tables.max_budget() {
        let expected = common::enumerate_value(&g, 1, b);
        assert!(
            (tables.v_units(1, b) - expected).abs() <= 1e-9,
            "budget {b}: {} vs {expected}",
            tables.v_units(1, b)
        );
    }
}

#[test]
fn monte_carlo_agrees_with_the_solved_values() {
    let n = 100_000;
    for seed in [1u64, 7, 21, 33] {
        let p = common::mc_instance(seed);
        let tables = solve(&p);
        let stats = sim::estimate(&p, &tables, n, seed);
        let v = tables.v(1, p.initial_budget());
        assert!(
            (stats.mean_return - v).abs() <= 3.0 * stats.std_error + 1e-9,
            "seed {seed}: mean {} vs value {v} (se {})",
            stats.mean_return,
            stats.std_error
        );
        let s = tables.surv(1, p.initial_budget());
        let se = (s * (1.0 - s) / n as f64).sqrt();
        assert!(
            (stats.survival_rate - s).abs() <= 3.0 * se + 1e-9,
            "seed {seed}: survival {} vs {s}",
            stats.survival_rate
        );
    }
}

#[test]
fn deterministic_policy_hits_the_value_exactly() {
    // the safe coin never risks the budget, so every rollout returns T
    let g = scenarios::gambler(1, 3);
    let silver = g.action_index("silver").unwrap();
    let stats = sim::estimate(&g, &ConstPolicy(silver), 500, 9);
    assert_eq!(stats.mean_return, 3.0);
    assert_eq!(stats.std_error, 0.0);
    assert_eq!(stats.survival_rate, 1.0);
}

#[test]
fn traces_conserve_the_budget() {
    for seed in 0..25u64 {
        let p = common::random_instance(seed + 500);
        let tables = solve(&p);
        let trace = sim::rollout(&p, &tables, seed);
        let b0 = p.initial_budget();
        for step in &trace.steps {
            assert_eq!(step.budget_after, step.budget_before + step.clipped_reward);
        }
        for pair in trace.steps.windows(2) {
            assert_eq!(pair[0].budget_after, pair[1].budget_before);
        }
        let last = trace.steps.last().map_or(b0, |s| s.budget_after);
        assert_eq!(trace.total_clipped, last - b0);
        assert_eq!(trace.terminated_early, last == 0);
        if trace.steps.len() < p.horizon() {
            assert!(trace.terminated_early);
        }
        // identical seed, identical trace
        let replay = sim::rollout(&p, &tables, seed);
        assert_eq!(replay.steps.len(), trace.steps.len());
        assert_eq!(replay.total_clipped, trace.total_clipped);
        assert_eq!(replay.total_principal, trace.total_principal);
    }
}

#[test]
fn generator_support_and_weights_are_uniform() {
    // 7 outcomes, 4-outcome supports: each outcome should be included with
    // probability 4/7, and each support slot should average weight 1/4
    let trials = 400u64;
    let mut counts = vec![0usize; 7];
    let mut slot_sums = vec![0.0f64; 4];
    let mut actions_seen = 0usize;
    for seed in 0..trials {
        let p = sim::random_problem(6, 4, 3, 5, 2, seed).unwrap();
        for a in p.actions() {
            assert_eq!(a.support().len(), 4);
            let total: f64 = a.support().iter().map(|&(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (slot, &(y, w)) in a.support().iter().enumerate() {
                counts[y] += 1;
                slot_sums[slot] += w;
            }
            actions_seen += 1;
        }
    }
    let include = 4.0 / 7.0;
    for (y, &c) in counts.iter().enumerate() {
        let freq = c as f64 / actions_seen as f64;
        // generous band: viability resampling slightly favors high rewards
        assert!(
            (freq - include).abs() < 0.08,
            "outcome {y}: inclusion frequency {freq} far from {include}"
        );
    }
    for (slot, &s) in slot_sums.iter().enumerate() {
        let mean = s / actions_seen as f64;
        assert!(
            (mean - 0.25).abs() < 0.02,
            "slot {slot}: mean weight {mean} far from 0.25"
        );
    }
}

#[test]
fn generator_is_deterministic_per_seed() {
    let a = sim::random_problem(5, 3, 2, 4, 6, 123).unwrap();
    let b = sim::random_problem(5, 3, 2, 4, 6, 123).unwrap();
    for (x, y) in a.actions().iter().zip(b.actions()) {
        assert_eq!(x.label(), y.label());
        assert_eq!(x.support(), y.support());
    }
    let c = sim::random_problem(5, 3, 2, 4, 6, 124).unwrap();
    assert!(a.actions().iter().zip(c.actions()).any(|(x, y)| x.support() != y.support()));
}
