//! Problem definition: outcomes, actions, budget dynamics and the one-step
//! quantities every other module is built on.
//!
//! Rewards and budgets are exact integers in units of `1/granularity` so the
//! budget lattice can be indexed directly. Probabilities are `f64`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Integer budget/reward quantity in `1/granularity` units.
pub type Units = i64;

const PROB_SUM_TOL: f64 = 1e-12;
const REWARD_GRID_TOL: f64 = 1e-9;

/// Finite outcome set with integer-grained rewards.
///
/// Outcomes with reward `>= 0` form the desired set, the rest the undesired
/// set; reward 0 counts as desired.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSpace {
    outcomes: Vec<(String, Units)>,
    granularity: u32,
}

impl OutcomeSpace {
    pub fn new(outcomes: Vec<(String, Units)>, granularity: u32) -> Result<Self> {
        if granularity == 0 {
            return Err(Error::BadGranularity);
        }
        if outcomes.is_empty() {
            return Err(Error::EmptyOutcomes);
        }
        let mut seen = std::collections::HashSet::new();
        for (label, _) in &outcomes {
            if !seen.insert(label.clone()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            outcomes,
            granularity,
        })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    pub fn label(&self, index: usize) -> &str {
        &self.outcomes[index].0
    }

    pub fn reward_units(&self, index: usize) -> Units {
        self.outcomes[index].1
    }

    pub fn reward_real(&self, index: usize) -> f64 {
        self.outcomes[index].1 as f64 / self.granularity as f64
    }

    /// Reward 0 belongs to the desired set.
    pub fn is_desired(&self, index: usize) -> bool {
        self.outcomes[index].1 >= 0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|(l, _)| l == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, Units)> {
        self.outcomes
            .iter()
            .enumerate()
            .map(|(i, (l, r))| (i, l.as_str(), *r))
    }
}

/// An action: a sparse distribution over outcome indices.
///
/// The support is kept sorted by reward (then outcome index) so that budget
/// transitions are always enumerated in increasing next-budget order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionModel {
    label: String,
    support: Vec<(usize, f64)>,
}

impl ActionModel {
    pub fn new(label: String, support: Vec<(usize, f64)>, space: &OutcomeSpace) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut sum = 0.0;
        for &(index, prob) in &support {
            if index >= space.len() || !seen.insert(index) {
                return Err(Error::BadSupportIndex {
                    action: label,
                    index,
                });
            }
            if !(prob > 0.0 && prob <= 1.0) {
                return Err(Error::ProbabilityRange {
                    action: label,
                    prob,
                });
            }
            sum += prob;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::ProbabilitySum { action: label, sum });
        }
        let mut support = support;
        support.sort_by_key(|&(i, _)| (space.reward_units(i), i));
        Ok(Self { label, support })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Support entries sorted by (reward, outcome index).
    pub fn support(&self) -> &[(usize, f64)] {
        &self.support
    }

    pub fn prob_of(&self, outcome: usize) -> f64 {
        self.support
            .iter()
            .find(|&&(i, _)| i == outcome)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn emits(&self, outcome: usize) -> bool {
        self.support.iter().any(|&(i, _)| i == outcome)
    }
}

/// A validated survival decision problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalProblem {
    outcome_space: OutcomeSpace,
    actions: Vec<ActionModel>,
    initial_budget: Units,
    horizon: usize,
}

impl SurvivalProblem {
    pub fn new(
        outcome_space: OutcomeSpace,
        actions: Vec<ActionModel>,
        initial_budget: Units,
        horizon: usize,
    ) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::EmptyActions);
        }
        let mut seen = std::collections::HashSet::new();
        for a in &actions {
            if !seen.insert(a.label().to_owned()) {
                return Err(Error::DuplicateLabel(a.label().to_owned()));
            }
        }
        if initial_budget < 0 {
            return Err(Error::BadInitialBudget {
                budget: initial_budget as f64,
                granularity: outcome_space.granularity(),
            });
        }
        if horizon == 0 {
            return Err(Error::BadHorizon);
        }
        let problem = Self {
            outcome_space,
            actions,
            initial_budget,
            horizon,
        };
        if (0..problem.actions.len()).all(|a| problem.expected_reward_units(a) < 0.0) {
            return Err(Error::NoViableAction);
        }
        Ok(problem)
    }

    pub fn outcome_space(&self) -> &OutcomeSpace {
        &self.outcome_space
    }

    pub fn actions(&self) -> &[ActionModel] {
        &self.actions
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action(&self, index: usize) -> &ActionModel {
        &self.actions[index]
    }

    pub fn action_index(&self, label: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a.label() == label)
            .ok_or_else(|| Error::UnknownAction(label.to_owned()))
    }

    pub fn initial_budget(&self) -> Units {
        self.initial_budget
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn granularity(&self) -> u32 {
        self.outcome_space.granularity()
    }

    /// Converts units to real reward scale.
    pub fn to_real(&self, units: f64) -> f64 {
        units / self.granularity() as f64
    }

    /// Largest positive reward across outcomes, 0 if none.
    pub fn max_positive_reward(&self) -> Units {
        self.outcome_space
            .iter()
            .map(|(_, _, r)| r)
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// Magnitude of the most negative reward, 0 if none.
    pub fn max_loss(&self) -> Units {
        self.outcome_space
            .iter()
            .map(|(_, _, r)| r)
            .min()
            .unwrap_or(0)
            .min(0)
            .abs()
    }

    /// Sup-norm of the rewards.
    pub fn reward_sup_norm(&self) -> Units {
        self.max_positive_reward().max(self.max_loss())
    }

    /// Plain expected reward in units.
    pub fn expected_reward_units(&self, action: usize) -> f64 {
        self.actions[action]
            .support()
            .iter()
            .map(|&(y, p)| p * self.outcome_space.reward_units(y) as f64)
            .sum()
    }

    /// Plain expected reward in real units.
    pub fn expected_reward(&self, action: usize) -> f64 {
        self.to_real(self.expected_reward_units(action))
    }

    /// Expected clipped reward in units at the given budget.
    pub fn expected_clipped_reward_units(&self, action: usize, budget: Units) -> Result<f64> {
        if action >= self.actions.len() {
            return Err(Error::ActionIndex(action));
        }
        Ok(self.actions[action]
            .support()
            .iter()
            .map(|&(y, p)| p * clipped_reward(self.outcome_space.reward_units(y), budget) as f64)
            .sum())
    }

    /// Expected clipped reward in real units.
    pub fn expected_clipped_reward(&self, action: usize, budget: Units) -> Result<f64> {
        Ok(self.to_real(self.expected_clipped_reward_units(action, budget)?))
    }

    /// Expected reward restricted to desired outcomes, in units. Non-negative.
    pub fn optimistic_reward_units(&self, action: usize) -> f64 {
        self.actions[action]
            .support()
            .iter()
            .filter(|&&(y, _)| self.outcome_space.is_desired(y))
            .map(|&(y, p)| p * self.outcome_space.reward_units(y) as f64)
            .sum()
    }

    /// Expected reward restricted to desired outcomes, in real units.
    pub fn optimistic_reward(&self, action: usize) -> f64 {
        self.to_real(self.optimistic_reward_units(action))
    }

    /// Probability that the action's outcome is desired.
    pub fn desired_mass(&self, action: usize) -> f64 {
        self.actions[action]
            .support()
            .iter()
            .filter(|&&(y, _)| self.outcome_space.is_desired(y))
            .map(|&(_, p)| p)
            .sum()
    }

    /// One-step survival probability: mass of outcomes with reward > -budget.
    pub fn one_step_survival(&self, action: usize, budget: Units) -> Result<f64> {
        if budget <= 0 {
            return Err(Error::ZeroBudget);
        }
        Ok(self.actions[action]
            .support()
            .iter()
            .filter(|&&(y, _)| self.outcome_space.reward_units(y) > -budget)
            .map(|&(_, p)| p)
            .sum())
    }

    /// Distribution over next budgets, in increasing budget order.
    ///
    /// Mass at 0 is the one-step death probability.
    pub fn transition_distribution(
        &self,
        budget: Units,
        action: usize,
    ) -> Result<Vec<(Units, f64)>> {
        if budget <= 0 {
            return Err(Error::ZeroBudget);
        }
        let mut dist: BTreeMap<Units, f64> = BTreeMap::new();
        for &(y, p) in self.actions[action].support() {
            let next = budget + clipped_reward(self.outcome_space.reward_units(y), budget);
            *dist.entry(next).or_insert(0.0) += p;
        }
        Ok(dist.into_iter().collect())
    }

    pub fn build_budget_lattice(&self) -> BudgetLattice {
        BudgetLattice {
            max_budget: self.initial_budget + self.horizon as Units * self.max_positive_reward(),
        }
    }
}

/// Clipped reward: `max(-budget, reward)` while alive, 0 once the budget is 0.
pub fn clipped_reward(reward: Units, budget: Units) -> Units {
    if budget > 0 {
        reward.max(-budget)
    } else {
        0
    }
}

/// Dense budget range `[0, initial + horizon * max_positive_reward]`.
///
/// Budget 0 is absorbing; every transition from a budget attainable at some
/// time step lands back in the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetLattice {
    max_budget: Units,
}

impl BudgetLattice {
    pub fn max_budget(&self) -> Units {
        self.max_budget
    }

    pub fn contains(&self, budget: Units) -> bool {
        (0..=self.max_budget).contains(&budget)
    }

    pub fn len(&self) -> usize {
        self.max_budget as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// External problem description (JSON). Rewards and budget are reals that
/// must land on the `1/granularity` grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub granularity: u32,
    pub outcomes: Vec<OutcomeSpecEntry>,
    pub actions: Vec<ActionSpecEntry>,
    pub initial_budget: f64,
    pub horizon: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeSpecEntry {
    pub label: String,
    pub reward: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionSpecEntry {
    pub label: String,
    pub probs: BTreeMap<String, f64>,
}

fn real_to_units(value: f64, granularity: u32, label: &str) -> Result<Units> {
    let scaled = value * granularity as f64;
    let rounded = scaled.round();
    if (scaled - rounded).abs() > REWARD_GRID_TOL {
        return Err(Error::RewardNotRepresentable {
            label: label.to_owned(),
            reward: value,
            granularity,
        });
    }
    Ok(rounded as Units)
}

/// Validates an external description into an exact problem.
pub fn validate_problem(spec: &ProblemSpec) -> Result<SurvivalProblem> {
    if spec.granularity == 0 {
        return Err(Error::BadGranularity);
    }
    let outcomes = spec
        .outcomes
        .iter()
        .map(|o| Ok((o.label.clone(), real_to_units(o.reward, spec.granularity, &o.label)?)))
        .collect::<Result<Vec<_>>>()?;
    let space = OutcomeSpace::new(outcomes, spec.granularity)?;
    let actions = spec
        .actions
        .iter()
        .map(|a| {
            let support = a
                .probs
                .iter()
                .map(|(label, &p)| {
                    let index = space
                        .index_of(label)
                        .ok_or_else(|| Error::UnknownOutcome(label.clone()))?;
                    Ok((index, p))
                })
                .collect::<Result<Vec<_>>>()?;
            ActionModel::new(a.label.clone(), support, &space)
        })
        .collect::<Result<Vec<_>>>()?;
    if spec.initial_budget < 0.0 {
        return Err(Error::BadInitialBudget {
            budget: spec.initial_budget,
            granularity: spec.granularity,
        });
    }
    let budget = real_to_units(spec.initial_budget, spec.granularity, "initial_budget")
        .map_err(|_| Error::BadInitialBudget {
            budget: spec.initial_budget,
            granularity: spec.granularity,
        })?;
    SurvivalProblem::new(space, actions, budget, spec.horizon)
}

/// Renders a problem back into the external description format.
pub fn problem_to_spec(problem: &SurvivalProblem) -> ProblemSpec {
    let space = problem.outcome_space();
    ProblemSpec {
        granularity: space.granularity(),
        outcomes: space
            .iter()
            .map(|(i, label, _)| OutcomeSpecEntry {
                label: label.to_owned(),
                reward: space.reward_real(i),
            })
            .collect(),
        actions: problem
            .actions()
            .iter()
            .map(|a| ActionSpecEntry {
                label: a.label().to_owned(),
                probs: a
                    .support()
                    .iter()
                    .map(|&(y, p)| (space.label(y).to_owned(), p))
                    .collect(),
            })
            .collect(),
        initial_budget: problem.initial_budget() as f64 / space.granularity() as f64,
        horizon: problem.horizon(),
    }
}
