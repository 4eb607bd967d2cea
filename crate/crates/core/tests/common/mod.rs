//! Shared helpers for the integration suites: an exhaustive-enumeration
//! oracle, seeded random instance families, and reusable batch checks whose
//! violations are reported as strings so callers can print or assert.
#![allow(dead_code)]

use survival_mdp::model::clipped_reward;
use survival_mdp::solver::{solve, SolveTables};
use survival_mdp::taxonomy::{
    check_long_term_aversion, check_risk_seeking, check_short_term_aversion, classify_behavior,
    lemma1_threshold, risk_neutral_set,
};
use survival_mdp::{alignment, sim, SurvivalProblem, Units};

/// Ground-truth value by recursion over every outcome path. Exponential in
/// the horizon; only for small instances.
pub fn enumerate_value(problem: &SurvivalProblem, t: usize, budget: Units) -> f64 {
    if budget <= 0 || t > problem.horizon() {
        return 0.0;
    }
    let space = problem.outcome_space();
    (0..problem.n_actions())
        .map(|a| {
            problem
                .action(a)
                .support()
                .iter()
                .map(|&(y, p)| {
                    let r = clipped_reward(space.reward_units(y), budget);
                    p * (r as f64 + enumerate_value(problem, t + 1, budget + r))
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Small instance within enumeration reach: up to 3 actions over the
/// 3-outcome space {-1, 0, +1}, horizon at most 4, budget at most 3.
pub fn tiny_instance(seed: u64) -> SurvivalProblem {
    let s = sim::splitmix64(seed ^ 0x7477);
    let n_actions = 1 + (s % 3) as usize;
    let support = 1 + ((s >> 8) % 3) as usize;
    let horizon = 1 + ((s >> 16) % 4) as usize;
    let budget = 1 + ((s >> 24) % 3) as Units;
    sim::random_problem(n_actions, support, 1, budget, horizon, seed).expect("viable tiny instance")
}

/// Mid-size instance: up to 5 actions over 7 outcomes, horizon at most 12.
pub fn random_instance(seed: u64) -> SurvivalProblem {
    let s = sim::splitmix64(seed ^ 0x6d69);
    let n_actions = 2 + (s % 4) as usize;
    let support = 1 + ((s >> 8) % 4) as usize;
    let horizon = 1 + ((s >> 16) % 12) as usize;
    let budget = 1 + ((s >> 24) % 6) as Units;
    sim::random_problem(n_actions, support, 3, budget, horizon, seed)
        .expect("viable random instance")
}

/// Instance sized for Monte-Carlo cross-checks: horizon at most 8.
pub fn mc_instance(seed: u64) -> SurvivalProblem {
    let s = sim::splitmix64(seed ^ 0x6d63);
    let n_actions = 2 + (s % 4) as usize;
    let support = 1 + ((s >> 8) % 4) as usize;
    let horizon = 1 + ((s >> 16) % 8) as usize;
    let budget = 1 + ((s >> 24) % 5) as Units;
    sim::random_problem(n_actions, support, 3, budget, horizon, seed).expect("viable MC instance")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// DP-vs-enumeration mismatches at the start state over a seed range.
pub fn enumeration_mismatches(seeds: std::ops::Range<u64>) -> Vec<String> {
    let mut bad = Vec::new();
    for seed in seeds {
        let p = tiny_instance(seed);
        let tables = solve(&p);
        let b0 = p.initial_budget();
        let expected = enumerate_value(&p, 1, b0);
        let got = tables.v_units(1, b0);
        if !rel_close(got, expected, 1e-9) {
            bad.push(format!("seed {seed}: dp {got} vs enumeration {expected}"));
        }
    }
    bad
}

/// Runs every sufficient-condition checker across a seed range and collects
/// any instance where a passing condition is not matched by the solved
/// policy. Returns (number of condition reports evaluated, violations).
pub fn condition_soundness(seeds: std::ops::Range<u64>) -> (usize, Vec<String>) {
    let mut evaluated = 0usize;
    let mut bad = Vec::new();
    for seed in seeds {
        let p = random_instance(seed);
        let tables = solve(&p);
        let behavior = classify_behavior(&p, &tables);
        let max_b = tables.max_budget();
        let b_hats = [1, (max_b / 2).max(1), max_b];
        for t in 1..=p.horizon() {
            for &b_hat in &b_hats {
                if let Ok(r) = check_short_term_aversion(&p, &tables, t, b_hat) {
                    evaluated += 1;
                    if r.premise_met && r.holds {
                        if !r.guaranteed_behavior_verified {
                            bad.push(format!("seed {seed} t {t} b_hat {b_hat}: short-term holds but unverified"));
                        }
                        for b in 1..=b_hat {
                            let cell = behavior.cell(t, b);
                            if !(cell.short_term_survival || cell.tie) {
                                bad.push(format!(
                                    "seed {seed} t {t} b {b}: short-term holds but policy is not a one-step survival maximizer"
                                ));
                            }
                        }
                    }
                }
                if let Ok(r) = check_long_term_aversion(&p, &tables, t, b_hat) {
                    evaluated += 1;
                    if r.premise_met {
                        for cell in &r.cells {
                            if cell.holds {
                                if !cell.verified {
                                    bad.push(format!(
                                        "seed {seed} t {t} b {b}: long-term holds but unverified",
                                        b = cell.budget
                                    ));
                                }
                                let flags = behavior.cell(t, cell.budget);
                                if !(flags.long_term_survival || flags.tie) {
                                    bad.push(format!(
                                        "seed {seed} t {t} b {b}: long-term holds but policy is not a horizon survival maximizer",
                                        b = cell.budget
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            for b in 1..=max_b {
                if let Ok(r) = check_risk_seeking(&p, &tables, t, b) {
                    evaluated += 1;
                    if r.premise_met && r.holds {
                        let flags = behavior.cell(t, b);
                        if !(flags.risk_seeking || flags.tie) {
                            bad.push(format!(
                                "seed {seed} t {t} b {b}: risk-seeking holds but policy is not optimistic"
                            ));
                        }
                    }
                }
            }
        }
    }
    (evaluated, bad)
}

/// Checks that above the clip-free budget threshold the policy always plays
/// a plain expected-reward maximizer, at every covered cell of every row,
/// and that the threshold sequence is non-increasing in t.
pub fn threshold_violations(seeds: std::ops::Range<u64>) -> Vec<String> {
    let mut bad = Vec::new();
    for seed in seeds {
        let p = random_instance(seed);
        let tables = solve(&p);
        let neutral = risk_neutral_set(&p);
        let mut prev = Units::MAX;
        for t in 1..=p.horizon() {
            let thr = lemma1_threshold(&p, t);
            if thr > prev {
                bad.push(format!("seed {seed}: threshold increases at t {t}"));
            }
            prev = thr;
            for b in thr.max(1)..tables.row_width(t) as Units {
                if !(neutral.contains(&tables.policy(t, b)) || tables.tie(t, b)) {
                    bad.push(format!(
                        "seed {seed} t {t} b {b}: above-threshold cell is not risk neutral"
                    ));
                }
            }
        }
    }
    bad
}

/// Principal dominance and non-negative misalignment gap over a seed range.
pub fn principal_violations(seeds: std::ops::Range<u64>) -> Vec<String> {
    let mut bad = Vec::new();
    for seed in seeds {
        let p = random_instance(seed);
        let tables = solve(&p);
        let under_agent = alignment::principal_value(&p, &tables);
        let optimal = alignment::principal_solve(&p);
        for t in 1..=p.horizon() {
            for b in 1..tables.row_width(t) as Units {
                let scale = tables.v_units(t, b).abs().max(1.0);
                if under_agent.v_units(t, b) > tables.v_units(t, b) + 1e-9 * scale {
                    bad.push(format!(
                        "seed {seed} t {t} b {b}: principal value exceeds the clipped value"
                    ));
                }
                if optimal.v_units(t, b) < under_agent.v_units(t, b) - 1e-9 * scale {
                    bad.push(format!(
                        "seed {seed} t {t} b {b}: principal optimum below the agent policy's value"
                    ));
                }
            }
        }
        let report = alignment::misalignment_report(&p, &tables).expect("positive start budget");
        if report.gap < -1e-9 {
            bad.push(format!("seed {seed}: negative misalignment gap {}", report.gap));
        }
    }
    bad
}

/// Rebuilds a problem with one outcome's reward replaced, keeping every
/// action's support and probabilities.
pub fn with_reward(base: &SurvivalProblem, label: &str, reward: Units) -> SurvivalProblem {
    use survival_mdp::model::{ActionModel, OutcomeSpace};
    let outcomes: Vec<(String, Units)> = base
        .outcome_space()
        .iter()
        .map(|(_, l, r)| (l.to_owned(), if l == label { reward } else { r }))
        .collect();
    let space = OutcomeSpace::new(outcomes, base.granularity()).unwrap();
    let actions: Vec<ActionModel> = base
        .actions()
        .iter()
        .map(|a| ActionModel::new(a.label().to_owned(), a.support().to_vec(), &space).unwrap())
        .collect();
    SurvivalProblem::new(space, actions, base.initial_budget(), base.horizon()).unwrap()
}

/// Recomputes one Bellman backup for a cell directly from the next row.
pub fn backup_value(problem: &SurvivalProblem, tables: &SolveTables, t: usize, b: Units) -> f64 {
    let space = problem.outcome_space();
    (0..problem.n_actions())
        .map(|a| {
            problem
                .action(a)
                .support()
                .iter()
                .map(|&(y, p)| {
                    let r = clipped_reward(space.reward_units(y), b);
                    let next = b + r;
                    let cont = if next > 0 { tables.v_units(t + 1, next) } else { 0.0 };
                    p * (r as f64 + cont)
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
