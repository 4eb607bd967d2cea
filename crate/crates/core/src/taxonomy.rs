//! Classifies solved-policy choices against the risk-behavior taxonomy and
//! evaluates the sufficient conditions for risk-neutral, survival-seeking and
//! risk-seeking behavior.
//!
//! All checkers are sufficient-condition tests: when a premise fails they say
//! so instead of evaluating vacuously, and `holds = true` is always paired
//! with a verification of the solved policy itself.

use crate::model::{SurvivalProblem, Units};
use crate::solver::{action_prefixed_survival, ReturnDecomposition, SolveTables};
use crate::{Error, Result};
use serde::Serialize;
use std::io::Write;

const ARGMAX_TOL: f64 = 1e-12;

fn argmax_set(values: &[f64]) -> Vec<usize> {
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = ARGMAX_TOL * best.abs().max(1.0);
    (0..values.len()).filter(|&i| best - values[i] <= tol).collect()
}

/// Action maximizing plain expected reward; ties broken by lowest index.
pub fn risk_neutral_action(problem: &SurvivalProblem) -> usize {
    let e: Vec<f64> = (0..problem.n_actions())
        .map(|a| problem.expected_reward_units(a))
        .collect();
    argmax_set(&e)[0]
}

/// Actions tied for the highest plain expected reward.
pub fn risk_neutral_set(problem: &SurvivalProblem) -> Vec<usize> {
    let e: Vec<f64> = (0..problem.n_actions())
        .map(|a| problem.expected_reward_units(a))
        .collect();
    argmax_set(&e)
}

/// Action maximizing the optimistic (desired-outcomes-only) reward.
pub fn optimistic_action(problem: &SurvivalProblem) -> usize {
    optimistic_set(problem)[0]
}

pub fn optimistic_set(problem: &SurvivalProblem) -> Vec<usize> {
    let r: Vec<f64> = (0..problem.n_actions())
        .map(|a| problem.optimistic_reward_units(a))
        .collect();
    argmax_set(&r)
}

/// Per-cell taxonomy flags. The flags are not mutually exclusive.
#[derive(Debug, Clone, Copy, Default)]
pub struct BehaviorCell {
    pub action: u32,
    pub risk_neutral: bool,
    pub short_term_survival: bool,
    pub long_term_survival: bool,
    pub risk_seeking: bool,
    pub tie: bool,
}

/// Taxonomy flags for every (t, budget) cell of the nominal lattice.
#[derive(Debug, Clone)]
pub struct BehaviorReport {
    horizon: usize,
    max_budget: Units,
    cells: Vec<BehaviorCell>,
}

impl BehaviorReport {
    pub fn cell(&self, t: usize, budget: Units) -> &BehaviorCell {
        &self.cells[(t - 1) * self.max_budget as usize + (budget as usize - 1)]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn max_budget(&self) -> Units {
        self.max_budget
    }
}

/// Flags the solved policy's choice at every cell by membership in the four
/// argmax sets (expected reward, one-step survival, remaining-horizon
/// survival, optimistic reward).
pub fn classify_behavior(problem: &SurvivalProblem, tables: &SolveTables) -> BehaviorReport {
    let neutral = risk_neutral_set(problem);
    let seeking = optimistic_set(problem);
    let n = problem.n_actions();
    let max_budget = tables.max_budget();
    let mut cells = Vec::with_capacity(tables.horizon() * max_budget as usize);
    for t in 1..=tables.horizon() {
        for b in 1..=max_budget {
            let one_step: Vec<f64> = (0..n)
                .map(|a| problem.one_step_survival(a, b).expect("positive budget"))
                .collect();
            let long: Vec<f64> = (0..n)
                .map(|a| action_prefixed_survival(problem, tables, t, b, a).expect("valid cell"))
                .collect();
            let action = tables.policy(t, b);
            cells.push(BehaviorCell {
                action: action as u32,
                risk_neutral: neutral.contains(&action),
                short_term_survival: argmax_set(&one_step).contains(&action),
                long_term_survival: argmax_set(&long).contains(&action),
                risk_seeking: seeking.contains(&action),
                tie: tables.tie(t, b),
            });
        }
    }
    BehaviorReport {
        horizon: tables.horizon(),
        max_budget,
        cells,
    }
}

/// Sufficient budget (in units) for a risk-neutral choice at time `t`:
/// `(T - t) * sup-norm + |most negative reward|`. Above this level no
/// reachable continuation ever sees an active clip, so the plain argmax wins.
pub fn lemma1_threshold(problem: &SurvivalProblem, t: usize) -> Units {
    let remaining = (problem.horizon() - t) as Units;
    remaining * problem.reward_sup_norm() + problem.max_loss()
}

/// Diagnostic record for one sufficient-condition evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: &'static str,
    pub premise_met: bool,
    pub premise_note: Option<String>,
    pub dominant_action: Option<String>,
    /// Survival-gap lower bound over the checked budgets.
    pub beta_hat: Option<f64>,
    /// Largest advantage any other action holds over the dominant one:
    /// clipped-reward gap for the short-term check, survival-weighted
    /// conditional-return gap for the long-term check. Real scale, signed.
    pub eps_hat: Option<f64>,
    /// Long-term only: the same gap anchored at the optimistic action
    /// instead, reported for comparison.
    pub eps_hat_optimistic: Option<f64>,
    pub v_upper: Option<f64>,
    pub v_lower: Option<f64>,
    /// Risk-seeking premise bound, real scale; `None` means unbounded.
    pub c: Option<f64>,
    pub threshold: Option<f64>,
    pub holds: bool,
    /// True when `holds` and the solved policy exhibits the guaranteed
    /// behavior at every covered cell.
    pub guaranteed_behavior_verified: bool,
    /// Long-term detail: per-budget verdicts.
    pub cells: Vec<CellVerdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellVerdict {
    pub budget: Units,
    pub holds: bool,
    pub verified: bool,
}

impl ConditionReport {
    fn unmet(condition: &'static str, note: String) -> Self {
        Self {
            condition,
            premise_met: false,
            premise_note: Some(note),
            dominant_action: None,
            beta_hat: None,
            eps_hat: None,
            eps_hat_optimistic: None,
            v_upper: None,
            v_lower: None,
            c: None,
            threshold: None,
            holds: false,
            guaranteed_behavior_verified: false,
            cells: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Finds an action whose per-budget score dominates every other action at
/// every positive lattice budget.
fn dominant_action<F: Fn(usize, Units) -> f64>(
    problem: &SurvivalProblem,
    max_budget: Units,
    score: F,
) -> Option<usize> {
    'candidates: for a in 0..problem.n_actions() {
        for b in 1..=max_budget {
            let s = score(a, b);
            for other in 0..problem.n_actions() {
                if score(other, b) > s + ARGMAX_TOL {
                    continue 'candidates;
                }
            }
        }
        return Some(a);
    }
    None
}

/// Sufficient condition for the choice at time `t` to maximize one-step
/// survival at every budget up to `b_hat`.
pub fn check_short_term_aversion(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    t: usize,
    b_hat: Units,
) -> Result<ConditionReport> {
    const NAME: &str = "short_term_risk_aversion";
    let max_budget = tables.max_budget();
    let surv1 = |a: usize, b: Units| problem.one_step_survival(a, b).expect("positive budget");
    let Some(a_hat) = dominant_action(problem, max_budget, surv1) else {
        return Ok(ConditionReport::unmet(
            NAME,
            "no action dominates one-step survival at every budget".into(),
        ));
    };
    let mut beta_hat = f64::INFINITY;
    let mut eps_hat = f64::NEG_INFINITY;
    for b in 1..=b_hat {
        for a in 0..problem.n_actions() {
            if a == a_hat {
                continue;
            }
            beta_hat = beta_hat.min(surv1(a_hat, b) - surv1(a, b));
            // reward advantage of the risky alternative over the safe action
            let gap = problem.expected_clipped_reward(a, b)?
                - problem.expected_clipped_reward(a_hat, b)?;
            eps_hat = eps_hat.max(gap);
        }
    }
    if beta_hat <= 0.0 {
        return Ok(ConditionReport::unmet(
            NAME,
            format!("no positive survival gap below b_hat = {b_hat}"),
        ));
    }
    let g = problem.granularity() as f64;
    let (v_upper, v_lower) = tables.value_bounds(t + 1);
    let (v_upper, v_lower) = (v_upper / g, v_lower / g);
    if v_upper <= 0.0 {
        return Err(Error::ZeroValueBound);
    }
    let threshold = (eps_hat + v_upper - v_lower) / v_upper;
    let holds = beta_hat >= threshold;
    let verified = holds
        && (1..=b_hat).all(|b| {
            let scores: Vec<f64> = (0..problem.n_actions()).map(|a| surv1(a, b)).collect();
            argmax_set(&scores).contains(&tables.policy(t, b)) || tables.tie(t, b)
        });
    Ok(ConditionReport {
        condition: NAME,
        premise_met: true,
        premise_note: None,
        dominant_action: Some(problem.action(a_hat).label().to_owned()),
        beta_hat: Some(beta_hat),
        eps_hat: Some(eps_hat),
        eps_hat_optimistic: None,
        v_upper: Some(v_upper),
        v_lower: Some(v_lower),
        c: None,
        threshold: Some(threshold),
        holds,
        guaranteed_behavior_verified: verified,
        cells: Vec::new(),
    })
}

/// Sufficient condition for the choice at time `t` to maximize
/// remaining-horizon survival, checked per budget up to `b_hat`.
pub fn check_long_term_aversion(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    t: usize,
    b_hat: Units,
) -> Result<ConditionReport> {
    const NAME: &str = "long_term_risk_aversion";
    let max_budget = tables.max_budget();
    let aps = |a: usize, b: Units| {
        action_prefixed_survival(problem, tables, t, b, a).expect("valid cell")
    };
    let Some(a_hat) = dominant_action(problem, max_budget, aps) else {
        return Ok(ConditionReport::unmet(
            NAME,
            "no action dominates remaining-horizon survival at every budget".into(),
        ));
    };
    let mut beta_hat = f64::INFINITY;
    for b in 1..=b_hat {
        for a in 0..problem.n_actions() {
            if a != a_hat {
                beta_hat = beta_hat.min(aps(a_hat, b) - aps(a, b));
            }
        }
    }
    if beta_hat <= 0.0 {
        return Ok(ConditionReport::unmet(
            NAME,
            format!("no positive survival gap below b_hat = {b_hat}"),
        ));
    }
    let decomp = ReturnDecomposition::new(problem, tables);
    // survival-weighted conditional return, real scale
    let weighted = |a: usize, b: Units| -> Result<f64> {
        let (nu, p) = decomp.conditional_return(problem, tables, t, b, a)?;
        Ok(nu * p)
    };
    // `q = nu * P_surv - b (1 - P_surv)` exactly (dead paths return -b), so
    // `b * beta_hat >= eps_hat` forces the dominant action's q on top
    let a_bar = optimistic_action(problem);
    let mut eps_hat = f64::NEG_INFINITY;
    let mut eps_hat_optimistic = f64::NEG_INFINITY;
    for b in 1..=b_hat {
        for a in 0..problem.n_actions() {
            if a != a_hat {
                eps_hat = eps_hat.max(weighted(a, b)? - weighted(a_hat, b)?);
            }
            if a != a_bar {
                eps_hat_optimistic = eps_hat_optimistic.max(weighted(a_bar, b)? - weighted(a, b)?);
            }
        }
    }
    let g = problem.granularity() as f64;
    let mut cells = Vec::with_capacity(b_hat as usize);
    let mut any_holds = false;
    let mut all_verified = true;
    for b in 1..=b_hat {
        let holds = beta_hat >= eps_hat / (b as f64 / g);
        let verified = holds && {
            let scores: Vec<f64> = (0..problem.n_actions()).map(|a| aps(a, b)).collect();
            argmax_set(&scores).contains(&tables.policy(t, b)) || tables.tie(t, b)
        };
        if holds {
            any_holds = true;
            all_verified &= verified;
        }
        cells.push(CellVerdict { budget: b, holds, verified });
    }
    Ok(ConditionReport {
        condition: NAME,
        premise_met: true,
        premise_note: None,
        dominant_action: Some(problem.action(a_hat).label().to_owned()),
        beta_hat: Some(beta_hat),
        eps_hat: Some(eps_hat),
        eps_hat_optimistic: Some(eps_hat_optimistic),
        v_upper: None,
        v_lower: None,
        c: None,
        threshold: Some(eps_hat / (b_hat as f64 / g)),
        holds: any_holds,
        guaranteed_behavior_verified: any_holds && all_verified,
        cells,
    })
}

/// Smallest loss magnitude any action can incur, in units; `None` when no
/// action has a negative outcome (premise bound unbounded).
pub fn risk_seeking_premise_bound(problem: &SurvivalProblem) -> Option<Units> {
    let space = problem.outcome_space();
    problem
        .actions()
        .iter()
        .filter_map(|a| {
            a.support()
                .iter()
                .map(|&(y, _)| space.reward_units(y))
                .filter(|&r| r < 0)
                .map(|r| -r)
                .min()
        })
        .min()
}

/// Sufficient condition for the optimistic action to be chosen at
/// `(t, budget)` when the budget is below every action's first loss level.
pub fn check_risk_seeking(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    t: usize,
    budget: Units,
) -> Result<ConditionReport> {
    const NAME: &str = "risk_seeking";
    if budget <= 0 {
        return Err(Error::ZeroBudget);
    }
    let c = risk_seeking_premise_bound(problem);
    if let Some(c) = c {
        if budget > c {
            return Err(Error::BudgetAbovePremise { budget, c });
        }
    }
    let g = problem.granularity() as f64;
    let a_bar = optimistic_action(problem);
    let (v_upper, v_lower) = tables.value_bounds(t + 1);
    let (v_upper, v_lower) = (v_upper / g, v_lower / g);
    let b_real = budget as f64 / g;
    let mut holds = true;
    for a in 0..problem.n_actions() {
        if a == a_bar {
            continue;
        }
        let lhs = problem.optimistic_reward(a_bar) - problem.optimistic_reward(a);
        let rhs = v_upper * problem.desired_mass(a) - v_lower * problem.desired_mass(a_bar) + b_real;
        if lhs < rhs - ARGMAX_TOL {
            holds = false;
            break;
        }
    }
    let verified = holds && optimistic_set(problem).contains(&tables.policy(t, budget));
    Ok(ConditionReport {
        condition: NAME,
        premise_met: true,
        premise_note: None,
        dominant_action: Some(problem.action(a_bar).label().to_owned()),
        beta_hat: None,
        eps_hat: None,
        eps_hat_optimistic: None,
        v_upper: Some(v_upper),
        v_lower: Some(v_lower),
        c: c.map(|c| c as f64 / g),
        threshold: None,
        holds,
        guaranteed_behavior_verified: verified,
        cells: Vec::new(),
    })
}

/// CSV export of the per-cell taxonomy flags, t then budget ascending.
pub fn write_behavior_csv<W: Write>(
    problem: &SurvivalProblem,
    report: &BehaviorReport,
    mut out: W,
) -> Result<()> {
    writeln!(
        out,
        "t,budget_units,action_label,risk_neutral,short_surv,long_surv,risk_seeking,tie"
    )?;
    for t in 1..=report.horizon() {
        for b in 1..=report.max_budget() {
            let cell = report.cell(t, b);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                t,
                b,
                problem.action(cell.action as usize).label(),
                cell.risk_neutral,
                cell.short_term_survival,
                cell.long_term_survival,
                cell.risk_seeking,
                cell.tie
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use crate::solver::solve;

    #[test]
    fn reward_and_optimism_argmaxes() {
        let p = scenarios::assistant(10, 5);
        assert_eq!(risk_neutral_action(&p), p.action_index("a_m").unwrap());
        assert_eq!(optimistic_action(&p), p.action_index("a_e").unwrap());
        let g = scenarios::gambler(1, 3);
        assert_eq!(risk_neutral_action(&g), g.action_index("silver").unwrap());
        assert_eq!(optimistic_action(&g), g.action_index("golden").unwrap());
    }

    #[test]
    fn neutrality_thresholds() {
        let p = scenarios::assistant(10, 3);
        assert_eq!(lemma1_threshold(&p, 1), 300);
        assert_eq!(lemma1_threshold(&p, 3), 100);
        let g = scenarios::gambler(1, 3);
        assert_eq!(lemma1_threshold(&g, 1), 30);
    }

    #[test]
    fn policy_is_risk_neutral_above_the_threshold() {
        let g = scenarios::gambler(1, 3);
        let tables = solve(&g);
        let neutral = risk_neutral_set(&g);
        for t in 1..=3 {
            for b in lemma1_threshold(&g, t)..=tables.max_budget() {
                assert!(neutral.contains(&tables.policy(t, b)), "t={t} b={b}");
            }
        }
    }

    #[test]
    fn behavior_cells_for_the_desperate_gambler() {
        let g = scenarios::gambler(1, 3);
        let tables = solve(&g);
        let report = classify_behavior(&g, &tables);
        let cell = report.cell(1, 1);
        assert_eq!(cell.action as usize, g.action_index("golden").unwrap());
        assert!(cell.risk_seeking);
        assert!(!cell.risk_neutral);
        assert!(!cell.short_term_survival);
        assert!(!cell.tie);
        let rich = report.cell(1, 31);
        assert!(rich.risk_neutral);
        assert!(rich.short_term_survival);
    }

    #[test]
    fn behavior_csv_shape() {
        let g = scenarios::gambler(1, 2);
        let tables = solve(&g);
        let report = classify_behavior(&g, &tables);
        let mut buf = Vec::new();
        write_behavior_csv(&g, &report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 21);
        assert!(text.starts_with(
            "t,budget_units,action_label,risk_neutral,short_surv,long_surv,risk_seeking,tie"
        ));
    }

    #[test]
    fn short_term_premise_fails_without_a_strict_gap() {
        let g = scenarios::gambler(1, 3);
        let tables = solve(&g);
        // above budget 10 the coin also survives surely, so the gap closes
        let report = check_short_term_aversion(&g, &tables, 1, 15).unwrap();
        assert!(!report.premise_met);
        assert!(!report.holds);
    }

    #[test]
    fn short_term_condition_on_the_gambler() {
        let g = scenarios::gambler(1, 3);
        let tables = solve(&g);
        let report = check_short_term_aversion(&g, &tables, 1, 5).unwrap();
        assert!(report.premise_met);
        assert_eq!(report.dominant_action.as_deref(), Some("silver"));
        assert_eq!(report.beta_hat, Some(0.5));
        // the coin's clipped expectation beats the sure +1 at budget 1 by
        // 4.5 - 1, and that reward pull defeats the survival gap
        assert_eq!(report.eps_hat, Some(3.5));
        assert!(report.threshold.unwrap() > 1.0);
        assert!(!report.holds);
    }

    #[test]
    fn risk_seeking_condition_at_the_last_step() {
        let g = scenarios::gambler(1, 3);
        let tables = solve(&g);
        let report = check_risk_seeking(&g, &tables, 3, 1).unwrap();
        assert_eq!(report.c, Some(10.0));
        assert!(report.holds);
        assert!(report.guaranteed_behavior_verified);
        assert!(matches!(
            check_risk_seeking(&g, &tables, 3, 11),
            Err(Error::BudgetAbovePremise { budget: 11, c: 10 })
        ));
        assert!(check_risk_seeking(&g, &tables, 3, 0).is_err());
    }

    #[test]
    fn risk_seeking_premise_bounds() {
        assert_eq!(risk_seeking_premise_bound(&scenarios::gambler(1, 3)), Some(10));
        assert_eq!(risk_seeking_premise_bound(&scenarios::assistant(10, 5)), Some(20));
        let space = crate::model::OutcomeSpace::new(vec![("up".into(), 1)], 1).unwrap();
        let a = crate::model::ActionModel::new("a".into(), vec![(0, 1.0)], &space).unwrap();
        let p = crate::model::SurvivalProblem::new(space, vec![a], 1, 2).unwrap();
        assert_eq!(risk_seeking_premise_bound(&p), None);
    }

    #[test]
    fn long_term_premise_needs_a_dominant_action() {
        // at short horizons no single answer style dominates remaining-horizon
        // survival at every budget
        let p = scenarios::assistant(10, 5);
        let tables = solve(&p);
        let report = check_long_term_aversion(&p, &tables, 1, 9).unwrap();
        assert!(!report.premise_met);
        assert!(!report.holds);
    }

    #[test]
    fn long_term_condition_on_the_gambler() {
        let g = scenarios::gambler(1, 3);
        let tables = solve(&g);
        let report = check_long_term_aversion(&g, &tables, 1, 3).unwrap();
        assert!(report.premise_met);
        assert_eq!(report.dominant_action.as_deref(), Some("silver"));
        assert_eq!(report.beta_hat, Some(0.125));
        assert_eq!(report.cells.len(), 3);
        for cell in &report.cells {
            // soundness: a holding budget must show the guaranteed behavior
            assert!(!cell.holds || cell.verified, "budget {}", cell.budget);
        }
        let json = report.to_json();
        assert!(json.contains("long_term_risk_aversion"));
    }

    #[test]
    fn return_decomposition_identity_reconstructs_q() {
        // q(t,b,a) = nu * p_surv - b * (1 - p_surv): dead paths give back
        // exactly the budget they entered with
        let p = scenarios::assistant(10, 5);
        let tables = solve(&p);
        let decomp = crate::solver::ReturnDecomposition::new(&p, &tables);
        for t in 1..=5 {
            for b in 1..=tables.max_budget() {
                for a in 0..p.n_actions() {
                    let Ok((nu, ps)) = decomp.conditional_return(&p, &tables, t, b, a) else {
                        continue;
                    };
                    let q = nu * ps - b as f64 * (1.0 - ps);
                    assert!(
                        (q - tables.q_units(t, b, a)).abs() < 1e-9 * q.abs().max(1.0),
                        "t={t} b={b} a={a}"
                    );
                }
            }
        }
    }
}
