//! Principal-side evaluation, misalignment reporting, outcome-avoiding reward
//! shaping and the survival value of extra horizon.
//!
//! The principal receives the raw reward of every step taken while the agent
//! is alive (losses are not clipped at the budget), but the budget dynamics
//! and the death rule are the same as the agent's.

use crate::model::{clipped_reward, problem_to_spec, ProblemSpec, SurvivalProblem, Units};
use crate::solver::{
    lifetime_occupancy, solve_shaped, Policy, Shaping, SolveTables,
};
use crate::{Error, Result};
use serde::Serialize;

const TIE_TOL: f64 = 1e-12;

/// Principal value tables: `v[t-1][b]` in units, rows sized like the agent's.
#[derive(Debug, Clone)]
pub struct PrincipalTables {
    horizon: usize,
    max_budget: Units,
    granularity: u32,
    v: Vec<Vec<f64>>,
    /// Empty when the tables evaluate a fixed external policy.
    policy: Vec<Vec<u32>>,
}

impl PrincipalTables {
    pub fn v_units(&self, t: usize, budget: Units) -> f64 {
        self.v[t - 1][budget as usize]
    }

    pub fn v(&self, t: usize, budget: Units) -> f64 {
        self.v_units(t, budget) / self.granularity as f64
    }

    pub fn policy(&self, t: usize, budget: Units) -> usize {
        self.policy[t - 1][budget as usize] as usize
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn max_budget(&self) -> Units {
        self.max_budget
    }
}

/// Expected principal reward plus continuation for one action.
fn principal_action_value(
    problem: &SurvivalProblem,
    budget: Units,
    action: usize,
    v_next: &[f64],
) -> f64 {
    let space = problem.outcome_space();
    let mut q = 0.0;
    for &(y, p) in problem.action(action).support() {
        let r = space.reward_units(y);
        q += p * r as f64;
        let next = budget + clipped_reward(r, budget);
        if next > 0 {
            q += p * v_next[next as usize];
        }
    }
    q
}

fn principal_rows(
    problem: &SurvivalProblem,
    choose: impl Fn(usize, Units, &[f64]) -> usize,
) -> PrincipalTables {
    let horizon = problem.horizon();
    let max_budget = problem.build_budget_lattice().max_budget();
    let extend = problem.max_positive_reward();
    let width_at = |t: usize| (max_budget + (t as Units - 1) * extend) as usize + 1;

    let mut v = vec![Vec::new(); horizon + 1];
    let mut policy = vec![Vec::new(); horizon];
    v[horizon] = vec![0.0; width_at(horizon + 1)];
    for t in (1..=horizon).rev() {
        let width = width_at(t);
        let mut v_row = vec![0.0; width];
        let mut p_row = vec![0u32; width];
        for b in 1..width as Units {
            let a = choose(t, b, &v[t]);
            p_row[b as usize] = a as u32;
            v_row[b as usize] = principal_action_value(problem, b, a, &v[t]);
        }
        v[t - 1] = v_row;
        policy[t - 1] = p_row;
    }
    PrincipalTables {
        horizon,
        max_budget,
        granularity: problem.granularity(),
        v,
        policy,
    }
}

/// Principal value of a fixed agent policy.
pub fn principal_value(problem: &SurvivalProblem, policy: &dyn Policy) -> PrincipalTables {
    principal_rows(problem, |t, b, _| policy.action(t, b))
}

/// Principal-optimal planning under the same survival dynamics; argmax ties
/// go to the lowest action index.
pub fn principal_solve(problem: &SurvivalProblem) -> PrincipalTables {
    principal_rows(problem, |_, b, v_next| {
        let mut best = principal_action_value(problem, b, 0, v_next);
        let mut chosen = 0;
        for a in 1..problem.n_actions() {
            let q = principal_action_value(problem, b, a, v_next);
            if q > best + TIE_TOL * best.abs().max(1.0) {
                best = q;
                chosen = a;
            }
        }
        chosen
    })
}

/// Value comparison between the agent's solved policy and the principal's
/// own optimum, evaluated at the start state. Real reward scale.
#[derive(Debug, Clone, Serialize)]
pub struct PrincipalReport {
    pub agent_value: f64,
    pub principal_value_under_agent_policy: f64,
    pub principal_optimal_value: f64,
    /// `principal_optimal_value - principal_value_under_agent_policy`, >= 0.
    pub gap: f64,
    pub principal_first_action: String,
    pub agent_first_action: String,
    /// Nominal-lattice cells where the agent's choice is principal-suboptimal
    /// beyond tie tolerance.
    pub divergence_cells: Vec<(usize, Units)>,
}

pub fn misalignment_report(
    problem: &SurvivalProblem,
    tables: &SolveTables,
) -> Result<PrincipalReport> {
    let b0 = problem.initial_budget();
    if b0 <= 0 {
        return Err(Error::ZeroBudget);
    }
    let under_agent = principal_value(problem, tables);
    let optimal = principal_solve(problem);
    let mut divergence_cells = Vec::new();
    for t in 1..=problem.horizon() {
        for b in 1..=tables.max_budget() {
            let agent_a = tables.policy(t, b);
            let q_agent = principal_action_value(problem, b, agent_a, &optimal.v[t]);
            let q_best = optimal.v_units(t, b);
            if q_best - q_agent > TIE_TOL * q_best.abs().max(1.0) {
                divergence_cells.push((t, b));
            }
        }
    }
    Ok(PrincipalReport {
        agent_value: tables.v(1, b0),
        principal_value_under_agent_policy: under_agent.v(1, b0),
        principal_optimal_value: optimal.v(1, b0),
        gap: optimal.v(1, b0) - under_agent.v(1, b0),
        principal_first_action: problem.action(optimal.policy(1, b0)).label().to_owned(),
        agent_first_action: problem.action(tables.policy(1, b0)).label().to_owned(),
        divergence_cells,
    })
}

/// One probe of the bonus search.
#[derive(Debug, Clone, Serialize)]
pub struct ShapingProbe {
    pub bonus: Units,
    pub cell_action: String,
    pub avoids: bool,
}

/// Result of searching for a minimal outcome-avoiding reward bonus.
#[derive(Debug, Clone, Serialize)]
pub struct ShapingReport {
    pub avoid_outcome: String,
    pub t: usize,
    pub budget: Units,
    pub feasible: bool,
    /// On infeasibility: an action overlapping every candidate, with the
    /// shared outcome.
    pub witness: Option<(String, String)>,
    pub boosted_outcomes: Vec<String>,
    /// Minimal integer bonus (units) making the cell policy avoid every
    /// emitter of the outcome; 0 when unshaped planning already avoids it.
    pub bonus: Option<Units>,
    pub cell_action: Option<String>,
    /// Probability the avoided outcome is ever sampled from the queried cell
    /// onward under the shaped policy. The bonus only constrains the target
    /// cell, so for t < T later cells may still pick emitters and this can be
    /// positive; at t = T it is exactly 0 whenever the search succeeds.
    pub lifetime_occupancy: f64,
    pub audit: Vec<ShapingProbe>,
}

impl ShapingReport {
    /// JSON export: the problem in its external format plus the shaping
    /// overlay and the search audit trail.
    pub fn to_json(&self, problem: &SurvivalProblem) -> String {
        #[derive(Serialize)]
        struct Export<'a> {
            problem: ProblemSpec,
            shaping: &'a ShapingReport,
        }
        serde_json::to_string_pretty(&Export {
            problem: problem_to_spec(problem),
            shaping: self,
        })
        .expect("report serializes")
    }
}

/// Searches for the minimal one-step bonus on a loss-free action's outcomes
/// that makes the solved policy avoid `avoid_outcome` at `(t, budget)`.
///
/// The bonus is a side payment: it raises the instantaneous reward of the
/// boosted outcomes at step `t` only and never enters the budget. Feasibility
/// requires some action whose support is disjoint from the support of every
/// action that can emit the avoided outcome; boosting that support then
/// leaves every emitter's action value unchanged, so the search is monotone
/// and a doubling bracket plus binary search finds the minimal bonus.
pub fn find_shaping(
    problem: &SurvivalProblem,
    avoid_outcome: &str,
    t: usize,
    budget: Units,
) -> Result<ShapingReport> {
    let space = problem.outcome_space();
    let outcome = space
        .index_of(avoid_outcome)
        .ok_or_else(|| Error::UnknownOutcome(avoid_outcome.to_owned()))?;
    if t == 0 || t > problem.horizon() {
        return Err(Error::TimeOutOfRange {
            t,
            max: problem.horizon(),
        });
    }
    if budget <= 0 {
        return Err(Error::ZeroBudget);
    }
    let emitters: Vec<usize> = (0..problem.n_actions())
        .filter(|&a| problem.action(a).emits(outcome))
        .collect();

    let base = ShapingReport {
        avoid_outcome: avoid_outcome.to_owned(),
        t,
        budget,
        feasible: true,
        witness: None,
        boosted_outcomes: Vec::new(),
        bonus: None,
        cell_action: None,
        lifetime_occupancy: 0.0,
        audit: Vec::new(),
    };

    if emitters.is_empty() {
        // nothing can emit the outcome; unshaped planning already avoids it
        let tables = solve_shaped(problem, None);
        return Ok(ShapingReport {
            bonus: Some(0),
            cell_action: Some(problem.action(tables.policy(t, budget)).label().to_owned()),
            ..base
        });
    }

    // candidate: first action disjoint from every emitter's support
    let overlap = |a: usize, e: usize| -> Option<usize> {
        problem
            .action(a)
            .support()
            .iter()
            .map(|&(y, _)| y)
            .find(|&y| problem.action(e).emits(y))
    };
    let candidate = (0..problem.n_actions())
        .find(|&a| emitters.iter().all(|&e| overlap(a, e).is_none()));
    let Some(candidate) = candidate else {
        // every action shares an outcome with some emitter; report a pair,
        // preferring a non-emitter as the blocked candidate
        let a = (0..problem.n_actions())
            .find(|a| !emitters.contains(a))
            .unwrap_or(emitters[0]);
        let e = emitters.iter().find(|&&e| overlap(a, e).is_some()).copied().unwrap();
        let shared = overlap(a, e).unwrap();
        return Ok(ShapingReport {
            feasible: false,
            witness: Some((
                problem.action(a).label().to_owned(),
                space.label(shared).to_owned(),
            )),
            ..base
        });
    };

    let boosted: Vec<bool> = (0..space.len())
        .map(|y| problem.action(candidate).emits(y))
        .collect();
    let boosted_outcomes: Vec<String> = space
        .iter()
        .filter(|&(y, _, _)| boosted[y])
        .map(|(_, l, _)| l.to_owned())
        .collect();

    let mut audit = Vec::new();
    let mut probe = |bonus: Units| -> (bool, SolveTables) {
        let shaping = Shaping {
            t,
            bonus,
            boosted: boosted.clone(),
        };
        let tables = solve_shaped(problem, Some(&shaping));
        let a = tables.policy(t, budget);
        let avoids = !emitters.contains(&a);
        audit.push(ShapingProbe {
            bonus,
            cell_action: problem.action(a).label().to_owned(),
            avoids,
        });
        (avoids, tables)
    };

    let cap = 2 * problem.horizon() as Units * problem.reward_sup_norm();
    let (ok0, tables0) = probe(0);
    if ok0 {
        let a = tables0.policy(t, budget);
        return Ok(ShapingReport {
            bonus: Some(0),
            cell_action: Some(problem.action(a).label().to_owned()),
            boosted_outcomes,
            lifetime_occupancy: lifetime_occupancy(problem, &tables0, t, budget, outcome),
            audit,
            ..base
        });
    }
    let mut lo = 0;
    let mut hi = 1;
    loop {
        if hi > cap {
            return Err(Error::ShapingSearchCap { cap });
        }
        let (ok, _) = probe(hi);
        if ok {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let (ok, _) = probe(mid);
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (ok, tables) = probe(hi);
    debug_assert!(ok);
    let a = tables.policy(t, budget);
    Ok(ShapingReport {
        bonus: Some(hi),
        cell_action: Some(problem.action(a).label().to_owned()),
        boosted_outcomes,
        lifetime_occupancy: lifetime_occupancy(problem, &tables, t, budget, outcome),
        audit,
        ..base
    })
}

/// Estimated extra horizon needed for a safer action to overtake a riskier
/// one: start-state value divided by the one-step survival gap at the
/// smallest positive budget.
pub fn horizon_extension_estimate(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    budget: Units,
    safe_action: usize,
    risky_action: usize,
) -> Result<f64> {
    if budget <= 0 {
        return Err(Error::ZeroBudget);
    }
    let gap =
        problem.one_step_survival(safe_action, 1)? - problem.one_step_survival(risky_action, 1)?;
    if gap <= 0.0 {
        return Err(Error::NonPositiveSurvivalGap {
            safe: problem.action(safe_action).label().to_owned(),
            risky: problem.action(risky_action).label().to_owned(),
            gap,
        });
    }
    Ok(tables.v(1, budget) / gap)
}
