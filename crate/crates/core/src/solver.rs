//! Exact backward-induction solver and table queries.
//!
//! Tables are stored per time step `t in 1..=T` (plus an explicit all-zero
//! boundary row at `T+1`). Row `t` covers budgets `0..=max_budget +
//! (t-1)*R_max_pos`: the extra headroom means every stored cell has a fully
//! defined continuation, so any cell of the nominal lattice `[0, max_budget]`
//! is exact at every time step. Values are kept in integer reward units
//! (as `f64`); `granularity` converts to the real scale on export.
//!
//! Determinism: per-action sums iterate the support in increasing next-budget
//! order, and argmax ties prefer the action with higher one-step survival,
//! then the lowest action index.

use crate::model::{clipped_reward, SurvivalProblem, Units};
use crate::{Error, Result};
use std::io::Write;

/// Relative tolerance for treating two q-values as tied.
const TIE_TOL: f64 = 1e-12;

/// One-time-step reward bonus on a set of outcomes.
///
/// The bonus enters the instantaneous (clipped) reward at time `t` only; the
/// budget transition keeps the unshaped reward, treating the bonus as a side
/// payment rather than budget income.
#[derive(Debug, Clone)]
pub struct Shaping {
    pub t: usize,
    pub bonus: Units,
    pub boosted: Vec<bool>,
}

impl Shaping {
    fn bonus_at(&self, t: usize, outcome: usize) -> Units {
        if t == self.t && self.boosted[outcome] {
            self.bonus
        } else {
            0
        }
    }
}

/// Optimal value, action-value, policy and survival tables.
#[derive(Debug, Clone)]
pub struct SolveTables {
    horizon: usize,
    max_budget: Units,
    extend: Units,
    granularity: u32,
    n_actions: usize,
    /// v[t-1][b], t in 1..=T+1; row T+1 is the zero boundary.
    v: Vec<Vec<f64>>,
    /// q[t-1][b * n_actions + a], t in 1..=T.
    q: Vec<Vec<f64>>,
    policy: Vec<Vec<u32>>,
    surv: Vec<Vec<f64>>,
    tie: Vec<Vec<bool>>,
}

/// Value and survival tables for a supplied (possibly suboptimal) policy.
#[derive(Debug, Clone)]
pub struct PolicyEvalTables {
    horizon: usize,
    max_budget: Units,
    extend: Units,
    granularity: u32,
    v: Vec<Vec<f64>>,
    surv: Vec<Vec<f64>>,
}

/// A deterministic time- and budget-dependent action choice.
pub trait Policy {
    fn action(&self, t: usize, budget: Units) -> usize;
}

impl Policy for SolveTables {
    fn action(&self, t: usize, budget: Units) -> usize {
        self.policy(t, budget)
    }
}

/// Plays one fixed action everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ConstPolicy(pub usize);

impl Policy for ConstPolicy {
    fn action(&self, _t: usize, _budget: Units) -> usize {
        self.0
    }
}

impl<F: Fn(usize, Units) -> usize> Policy for F {
    fn action(&self, t: usize, budget: Units) -> usize {
        self(t, budget)
    }
}

fn row_width(max_budget: Units, extend: Units, t: usize) -> usize {
    (max_budget + (t as Units - 1) * extend) as usize + 1
}

/// q-value of one action at (t, b): expected clipped (possibly shaped) reward
/// plus the continuation over surviving budgets, in increasing b' order.
fn action_value(
    problem: &SurvivalProblem,
    shaping: Option<&Shaping>,
    t: usize,
    budget: Units,
    action: usize,
    v_next: &[f64],
) -> f64 {
    let space = problem.outcome_space();
    let mut q = 0.0;
    for &(y, p) in problem.action(action).support() {
        let r = space.reward_units(y);
        let bonus = shaping.map_or(0, |s| s.bonus_at(t, y));
        q += p * clipped_reward(r + bonus, budget) as f64;
        let next = budget + clipped_reward(r, budget);
        if next > 0 {
            q += p * v_next[next as usize];
        }
    }
    q
}

fn survival_step(
    problem: &SurvivalProblem,
    budget: Units,
    action: usize,
    surv_next: &[f64],
) -> f64 {
    let space = problem.outcome_space();
    let mut s = 0.0;
    for &(y, p) in problem.action(action).support() {
        let next = budget + clipped_reward(space.reward_units(y), budget);
        if next > 0 {
            s += p * surv_next[next as usize];
        }
    }
    s
}

/// Solves the problem exactly by backward induction.
pub fn solve(problem: &SurvivalProblem) -> SolveTables {
    solve_shaped(problem, None)
}

/// Backward induction with an optional one-step reward shaping overlay.
pub fn solve_shaped(problem: &SurvivalProblem, shaping: Option<&Shaping>) -> SolveTables {
    let horizon = problem.horizon();
    let max_budget = problem.build_budget_lattice().max_budget();
    let extend = problem.max_positive_reward();
    let n_actions = problem.n_actions();

    let mut v = vec![Vec::new(); horizon + 1];
    let mut q = vec![Vec::new(); horizon];
    let mut policy = vec![Vec::new(); horizon];
    let mut surv = vec![Vec::new(); horizon + 1];
    let mut tie = vec![Vec::new(); horizon];

    let boundary_width = row_width(max_budget, extend, horizon + 1);
    v[horizon] = vec![0.0; boundary_width];
    surv[horizon] = vec![1.0; boundary_width];
    surv[horizon][0] = 0.0;

    for t in (1..=horizon).rev() {
        let width = row_width(max_budget, extend, t);
        let mut v_row = vec![0.0; width];
        let mut q_row = vec![0.0; width * n_actions];
        let mut policy_row = vec![0u32; width];
        let mut surv_row = vec![0.0; width];
        let mut tie_row = vec![false; width];
        for b in 1..width as Units {
            let mut best = f64::NEG_INFINITY;
            for a in 0..n_actions {
                let qa = action_value(problem, shaping, t, b, a, &v[t]);
                q_row[b as usize * n_actions + a] = qa;
                if qa > best {
                    best = qa;
                }
            }
            let tol = TIE_TOL * best.abs().max(1.0);
            let mut chosen = usize::MAX;
            let mut chosen_surv = f64::NEG_INFINITY;
            let mut n_tied = 0;
            for a in 0..n_actions {
                if best - q_row[b as usize * n_actions + a] <= tol {
                    n_tied += 1;
                    let s1 = problem
                        .one_step_survival(a, b)
                        .expect("budget is positive");
                    if s1 > chosen_surv {
                        chosen = a;
                        chosen_surv = s1;
                    }
                }
            }
            policy_row[b as usize] = chosen as u32;
            tie_row[b as usize] = n_tied > 1;
            v_row[b as usize] = q_row[b as usize * n_actions + chosen];
            surv_row[b as usize] = survival_step(problem, b, chosen, &surv[t]);
        }
        v[t - 1] = v_row;
        q[t - 1] = q_row;
        policy[t - 1] = policy_row;
        surv[t - 1] = surv_row;
        tie[t - 1] = tie_row;
    }

    SolveTables {
        horizon,
        max_budget,
        extend,
        granularity: problem.granularity(),
        n_actions,
        v,
        q,
        policy,
        surv,
        tie,
    }
}

/// Evaluates an arbitrary policy with the same summation order as `solve`.
pub fn evaluate_policy(problem: &SurvivalProblem, policy: &dyn Policy) -> Result<PolicyEvalTables> {
    let horizon = problem.horizon();
    let max_budget = problem.build_budget_lattice().max_budget();
    let extend = problem.max_positive_reward();
    let n_actions = problem.n_actions();

    let mut v = vec![Vec::new(); horizon + 1];
    let mut surv = vec![Vec::new(); horizon + 1];
    let boundary_width = row_width(max_budget, extend, horizon + 1);
    v[horizon] = vec![0.0; boundary_width];
    surv[horizon] = vec![1.0; boundary_width];
    surv[horizon][0] = 0.0;

    for t in (1..=horizon).rev() {
        let width = row_width(max_budget, extend, t);
        let mut v_row = vec![0.0; width];
        let mut surv_row = vec![0.0; width];
        for b in 1..width as Units {
            let a = policy.action(t, b);
            if a >= n_actions {
                return Err(Error::ActionIndex(a));
            }
            v_row[b as usize] = action_value(problem, None, t, b, a, &v[t]);
            surv_row[b as usize] = survival_step(problem, b, a, &surv[t]);
        }
        v[t - 1] = v_row;
        surv[t - 1] = surv_row;
    }

    Ok(PolicyEvalTables {
        horizon,
        max_budget,
        extend,
        granularity: problem.granularity(),
        v,
        surv,
    })
}

impl SolveTables {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn max_budget(&self) -> Units {
        self.max_budget
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    /// Width of the stored row at time `t` (budgets `0..width`).
    pub fn row_width(&self, t: usize) -> usize {
        row_width(self.max_budget, self.extend, t)
    }

    /// Optimal value in units; `t in 1..=T+1`.
    pub fn v_units(&self, t: usize, budget: Units) -> f64 {
        self.v[t - 1][budget as usize]
    }

    /// Optimal value in real reward scale.
    pub fn v(&self, t: usize, budget: Units) -> f64 {
        self.v_units(t, budget) / self.granularity as f64
    }

    pub fn q_units(&self, t: usize, budget: Units, action: usize) -> f64 {
        self.q[t - 1][budget as usize * self.n_actions + action]
    }

    pub fn q(&self, t: usize, budget: Units, action: usize) -> f64 {
        self.q_units(t, budget, action) / self.granularity as f64
    }

    pub fn policy(&self, t: usize, budget: Units) -> usize {
        self.policy[t - 1][budget as usize] as usize
    }

    pub fn tie(&self, t: usize, budget: Units) -> bool {
        self.tie[t - 1][budget as usize]
    }

    /// Probability of surviving steps `t..=T` under the optimal policy.
    pub fn surv(&self, t: usize, budget: Units) -> f64 {
        self.surv[t - 1][budget as usize]
    }

    /// Extremes of `v_t` over the positive lattice budgets `1..=max_budget`.
    ///
    /// These are the continuation bounds that enter the behaviour-condition
    /// checks: death contributes value zero through the survival factor, so
    /// only live budgets are relevant.
    pub fn value_bounds(&self, t: usize) -> (f64, f64) {
        let row = &self.v[t - 1];
        let live = &row[1..=self.max_budget as usize];
        let upper = live.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lower = live.iter().cloned().fold(f64::INFINITY, f64::min);
        (upper, lower)
    }
}

impl PolicyEvalTables {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn max_budget(&self) -> Units {
        self.max_budget
    }

    pub fn row_width(&self, t: usize) -> usize {
        row_width(self.max_budget, self.extend, t)
    }

    pub fn v_units(&self, t: usize, budget: Units) -> f64 {
        self.v[t - 1][budget as usize]
    }

    pub fn v(&self, t: usize, budget: Units) -> f64 {
        self.v_units(t, budget) / self.granularity as f64
    }

    pub fn surv(&self, t: usize, budget: Units) -> f64 {
        self.surv[t - 1][budget as usize]
    }
}

/// Survival probability of taking `action` at `(t, budget)` and following the
/// solved policy afterwards.
pub fn action_prefixed_survival(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    t: usize,
    budget: Units,
    action: usize,
) -> Result<f64> {
    if budget <= 0 {
        return Err(Error::ZeroBudget);
    }
    if t > tables.horizon {
        return Err(Error::TimeOutOfRange {
            t,
            max: tables.horizon,
        });
    }
    Ok(survival_step(problem, budget, action, &tables.surv[t]))
}

/// Joint expectation tables for return-conditioned-on-survival queries:
/// `g_t(b) = E[return-to-go * 1{survive to T}]` under the solved policy.
#[derive(Debug, Clone)]
pub struct ReturnDecomposition {
    g: Vec<Vec<f64>>,
}

impl ReturnDecomposition {
    pub fn new(problem: &SurvivalProblem, tables: &SolveTables) -> Self {
        let horizon = tables.horizon;
        let space = problem.outcome_space();
        let mut g = vec![Vec::new(); horizon + 1];
        g[horizon] = vec![0.0; tables.row_width(horizon + 1)];
        for t in (1..=horizon).rev() {
            let width = tables.row_width(t);
            let mut row = vec![0.0; width];
            for b in 1..width as Units {
                let a = tables.policy(t, b);
                let mut acc = 0.0;
                for &(y, p) in problem.action(a).support() {
                    let rt = clipped_reward(space.reward_units(y), b);
                    let next = b + rt;
                    if next > 0 {
                        acc += p * (rt as f64 * tables.surv[t][next as usize] + g[t][next as usize]);
                    }
                }
                row[b as usize] = acc;
            }
            g[t - 1] = row;
        }
        Self { g }
    }

    /// Expected return-to-go conditioned on surviving to T when `action` is
    /// taken at `(t, budget)` and the solved policy follows. Returns
    /// `(nu_real, p_survive)`.
    pub fn conditional_return(
        &self,
        problem: &SurvivalProblem,
        tables: &SolveTables,
        t: usize,
        budget: Units,
        action: usize,
    ) -> Result<(f64, f64)> {
        if budget <= 0 {
            return Err(Error::ZeroBudget);
        }
        let space = problem.outcome_space();
        let mut num = 0.0;
        let mut p_surv = 0.0;
        for &(y, p) in problem.action(action).support() {
            let rt = clipped_reward(space.reward_units(y), budget);
            let next = budget + rt;
            if next > 0 {
                num += p * (rt as f64 * tables.surv[t][next as usize] + self.g[t][next as usize]);
                p_surv += p * tables.surv[t][next as usize];
            }
        }
        if p_surv <= 0.0 {
            return Err(Error::ZeroSurvival);
        }
        Ok((num / p_surv / problem.granularity() as f64, p_surv))
    }
}

/// Spec-shaped convenience wrapper around [`ReturnDecomposition`].
pub fn conditional_return(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    t: usize,
    budget: Units,
    action: usize,
) -> Result<(f64, f64)> {
    ReturnDecomposition::new(problem, tables).conditional_return(problem, tables, t, budget, action)
}

/// Exact per-action value increase from one extra remaining step, with the
/// survival-weighted lower bound.
#[derive(Debug, Clone, Copy)]
pub struct HorizonGap {
    /// `sum_{b'} P[b'|b,a] (v_{t+1}(b') - v_{t+2}(b'))`, real scale.
    pub exact: f64,
    /// `min_b (v_{t+1} - v_{t+2}) * P_surv^1(a, b)`, real scale.
    pub lower_bound: f64,
    /// The minimum value difference over positive lattice budgets.
    pub dv_min: f64,
}

/// Rate of increase of the action value in the remaining horizon, from the
/// `t+1` and `t+2` rows of one solved table (requires `t <= T - 1`; row
/// `T+1` is the zero boundary).
pub fn horizon_value_gap(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    t: usize,
    budget: Units,
    action: usize,
) -> Result<HorizonGap> {
    if budget <= 0 {
        return Err(Error::ZeroBudget);
    }
    if t + 1 > tables.horizon {
        return Err(Error::TimeOutOfRange {
            t,
            max: tables.horizon - 1,
        });
    }
    let space = problem.outcome_space();
    let g = problem.granularity() as f64;
    let mut exact = 0.0;
    for &(y, p) in problem.action(action).support() {
        let next = budget + clipped_reward(space.reward_units(y), budget);
        if next > 0 {
            exact += p * (tables.v[t][next as usize] - tables.v[t + 1][next as usize]);
        }
    }
    let mut dv_min = f64::INFINITY;
    for b in 1..=tables.max_budget as usize {
        dv_min = dv_min.min(tables.v[t][b] - tables.v[t + 1][b]);
    }
    let lower_bound = dv_min * problem.one_step_survival(action, budget)?;
    Ok(HorizonGap {
        exact: exact / g,
        lower_bound: lower_bound / g,
        dv_min: dv_min / g,
    })
}

/// Per-cell emission probability of one outcome under the solved policy, and
/// the probability it is ever observed from the start state.
#[derive(Debug, Clone)]
pub struct OccupancyReport {
    /// instantaneous[t-1][b] = p_{policy_t(b)}(outcome); budgets up to max_budget.
    pub instantaneous: Vec<Vec<f64>>,
    /// Probability the outcome is sampled at least once from (t=1, b_0).
    pub lifetime: f64,
}

/// Probability that `outcome` is ever sampled when starting from
/// `(start_t, start_b)` and following the solved policy.
///
/// Forward push over the state distribution; a first emission is treated as
/// absorbing so the result is a probability, not an expected count.
pub fn lifetime_occupancy(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    start_t: usize,
    start_b: Units,
    outcome: usize,
) -> f64 {
    if start_b <= 0 {
        return 0.0;
    }
    let space = problem.outcome_space();
    let mut dist = vec![0.0; tables.row_width(start_t)];
    dist[start_b as usize] = 1.0;
    let mut lifetime = 0.0;
    for t in start_t..=tables.horizon {
        let mut next_dist = vec![0.0; tables.row_width(t + 1)];
        for (b, &mass) in dist.iter().enumerate().skip(1) {
            if mass == 0.0 {
                continue;
            }
            let b = b as Units;
            let a = tables.policy(t, b);
            for &(y, p) in problem.action(a).support() {
                if y == outcome {
                    lifetime += mass * p;
                    continue;
                }
                let next = b + clipped_reward(space.reward_units(y), b);
                if next > 0 {
                    next_dist[next as usize] += mass * p;
                }
            }
        }
        dist = next_dist;
    }
    lifetime
}

pub fn outcome_occupancy(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    outcome_label: &str,
) -> Result<OccupancyReport> {
    let outcome = problem
        .outcome_space()
        .index_of(outcome_label)
        .ok_or_else(|| Error::UnknownOutcome(outcome_label.to_owned()))?;
    let mut instantaneous = Vec::with_capacity(tables.horizon);
    for t in 1..=tables.horizon {
        let mut row = vec![0.0; tables.max_budget as usize + 1];
        for b in 1..=tables.max_budget {
            row[b as usize] = problem.action(tables.policy(t, b)).prob_of(outcome);
        }
        instantaneous.push(row);
    }
    let lifetime = lifetime_occupancy(problem, tables, 1, problem.initial_budget(), outcome);
    Ok(OccupancyReport {
        instantaneous,
        lifetime,
    })
}

/// CSV export of the solved tables: one row per (t, budget), t then budget
/// ascending, with per-action q columns.
pub fn write_tables_csv<W: Write>(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    mut out: W,
) -> Result<()> {
    use crate::fmt::sig12;
    write!(out, "t,budget_units,budget_real,action_label")?;
    write!(out, ",v,surv")?;
    for a in problem.actions() {
        write!(out, ",q_{}", a.label())?;
    }
    writeln!(out)?;
    let g = problem.granularity() as f64;
    for t in 1..=tables.horizon {
        for b in 0..=tables.max_budget {
            let label = if b == 0 {
                "-"
            } else {
                problem.action(tables.policy(t, b)).label()
            };
            write!(
                out,
                "{},{},{},{},{},{}",
                t,
                b,
                sig12(b as f64 / g),
                label,
                sig12(tables.v(t, b)),
                sig12(tables.surv(t, b)),
            )?;
            for a in 0..tables.n_actions {
                let q = if b == 0 { 0.0 } else { tables.q(t, b, a) };
                write!(out, ",{}", sig12(q))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
