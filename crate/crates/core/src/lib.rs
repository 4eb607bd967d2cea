//! Exact finite-horizon planning for budget-constrained decision problems.
//!
//! An agent repeatedly picks actions with known outcome distributions. Each
//! outcome carries an integer-grained reward that is added to a running
//! budget; losses are clipped at the current budget and a budget of zero
//! permanently stops the process. This crate computes optimal policies for
//! that setting by backward induction, together with survival probabilities,
//! risk-behavior classifications, principal/agent misalignment reports and
//! outcome-avoiding reward shaping.
//!
//! Budgets and rewards are exact integers in units of `1/granularity`;
//! probabilities and values are `f64`.

pub mod alignment;
pub mod error;
mod fmt;
pub mod experiments;
pub mod model;
pub mod scenarios;
pub mod sim;
pub mod solver;
pub mod taxonomy;

pub use error::Error;
pub use model::{ActionModel, BudgetLattice, OutcomeSpace, ProblemSpec, SurvivalProblem, Units};
pub use solver::{solve, PolicyEvalTables, SolveTables};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
