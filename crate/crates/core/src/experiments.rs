//! Regret-style diagnostics and reproducible scenario sweeps.

use crate::fmt::sig12;
use crate::model::{validate_problem, ProblemSpec, SurvivalProblem, Units};
use crate::solver::{action_prefixed_survival, solve, PolicyEvalTables, SolveTables};
use crate::taxonomy::{optimistic_set, risk_neutral_set};
use crate::{scenarios, sim, Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Best plain expected one-step reward across actions, real scale.
pub fn best_expected_reward(problem: &SurvivalProblem) -> f64 {
    (0..problem.n_actions())
        .map(|a| problem.expected_reward(a))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn regret_from_value(
    problem: &SurvivalProblem,
    horizon: usize,
    v_real: f64,
    t: usize,
) -> Result<(f64, f64)> {
    if t == 0 || t > horizon {
        return Err(Error::TimeOutOfRange { t, max: horizon });
    }
    let steps = (horizon - t + 1) as f64;
    let regret = v_real - steps * best_expected_reward(problem);
    Ok((regret, regret / steps))
}

/// Survival premium at `(t, budget)`: realized value minus the
/// clip-free benchmark `steps_remaining * max_a E[R(Y_a)]`, and the same
/// difference per remaining step. Positive when limited liability pays,
/// negative when survival pressure costs reward.
pub fn regret(
    problem: &SurvivalProblem,
    tables: &SolveTables,
    t: usize,
    budget: Units,
) -> Result<(f64, f64)> {
    if budget <= 0 {
        return Err(Error::ZeroBudget);
    }
    regret_from_value(problem, tables.horizon(), tables.v(t, budget), t)
}

/// Same benchmark applied to an evaluated (possibly suboptimal) policy.
pub fn regret_eval(
    problem: &SurvivalProblem,
    tables: &PolicyEvalTables,
    t: usize,
    budget: Units,
) -> Result<(f64, f64)> {
    if budget <= 0 {
        return Err(Error::ZeroBudget);
    }
    regret_from_value(problem, tables.horizon(), tables.v(t, budget), t)
}

/// Declarative sweep description (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// One of `assistant`, `gambler`, `random10`, `file`.
    pub scenario: String,
    /// Problem description path, required for `scenario = "file"`.
    #[serde(default)]
    pub problem_file: Option<PathBuf>,
    pub horizons: Vec<usize>,
    /// Initial budgets, real scale; must lie on the problem's unit grid.
    pub budgets: Vec<f64>,
    /// Generator seeds, used by `random10` (one sweep per seed).
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn budgets_to_units(budgets: &[f64], granularity: u32) -> Result<Vec<Units>> {
    budgets
        .iter()
        .map(|&b| {
            let scaled = b * granularity as f64;
            let rounded = scaled.round();
            if b <= 0.0 || (scaled - rounded).abs() > 1e-9 {
                return Err(Error::BadConfig(format!(
                    "budget {b} is not a positive multiple of 1/{granularity}"
                )));
            }
            Ok(rounded as Units)
        })
        .collect()
}

/// Grid writer shared by all scenarios. `make` builds the problem for a given
/// (initial budget, horizon); one solve per horizon at the largest budget
/// serves every smaller budget since row values do not depend on the start.
fn write_grids(
    make: &dyn Fn(Units, usize) -> Result<SurvivalProblem>,
    horizons: &[usize],
    budgets: &[Units],
    dir: &Path,
    suffix: &str,
) -> Result<Vec<PathBuf>> {
    let b_top = *budgets.iter().max().expect("nonempty budgets");
    let policy_path = dir.join(format!("policy_grid{suffix}.csv"));
    let behavior_path = dir.join(format!("behavior_grid{suffix}.csv"));
    let regret_path = dir.join(format!("regret_grid{suffix}.csv"));
    let mut policy_out = fs::File::create(&policy_path)?;
    let mut behavior_out = fs::File::create(&behavior_path)?;
    let mut regret_out = fs::File::create(&regret_path)?;
    writeln!(policy_out, "horizon,budget,first_action,value,survival")?;
    writeln!(
        behavior_out,
        "horizon,budget,action_label,risk_neutral,short_surv,long_surv,risk_seeking,tie"
    )?;
    writeln!(regret_out, "horizon,budget,regret,regret_rate,first_action")?;

    for &h in horizons {
        let problem = make(b_top, h)?;
        let g = problem.granularity() as f64;
        let tables = solve(&problem);
        let neutral = risk_neutral_set(&problem);
        let seeking = optimistic_set(&problem);
        for &b in budgets {
            let action = tables.policy(1, b);
            let label = problem.action(action).label();
            writeln!(
                policy_out,
                "{},{},{},{},{}",
                h,
                sig12(b as f64 / g),
                label,
                sig12(tables.v(1, b)),
                sig12(tables.surv(1, b))
            )?;

            let one_step: Vec<f64> = (0..problem.n_actions())
                .map(|a| problem.one_step_survival(a, b).expect("positive budget"))
                .collect();
            let long: Vec<f64> = (0..problem.n_actions())
                .map(|a| action_prefixed_survival(&problem, &tables, 1, b, a).expect("valid cell"))
                .collect();
            let best_one = one_step.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let best_long = long.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            writeln!(
                behavior_out,
                "{},{},{},{},{},{},{},{}",
                h,
                sig12(b as f64 / g),
                label,
                neutral.contains(&action),
                best_one - one_step[action] <= 1e-12 * best_one.abs().max(1.0),
                best_long - long[action] <= 1e-12 * best_long.abs().max(1.0),
                seeking.contains(&action),
                tables.tie(1, b)
            )?;

            let (r, rate) = regret(&problem, &tables, 1, b)?;
            writeln!(
                regret_out,
                "{},{},{},{},{}",
                h,
                sig12(b as f64 / g),
                sig12(r),
                sig12(rate),
                label
            )?;
        }
    }
    Ok(vec![policy_path, behavior_path, regret_path])
}

/// Runs a configured sweep and writes `policy_grid`, `behavior_grid` and
/// `regret_grid` CSVs into the output directory. Deterministic for a fixed
/// config.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    if config.horizons.is_empty() || config.budgets.is_empty() {
        return Err(Error::BadConfig("need at least one horizon and one budget".into()));
    }
    fs::create_dir_all(&config.output_dir)?;
    match config.scenario.as_str() {
        "assistant" => {
            let budgets = budgets_to_units(&config.budgets, 1)?;
            write_grids(
                &|b0, h| Ok(scenarios::assistant(b0, h)),
                &config.horizons,
                &budgets,
                &config.output_dir,
                "",
            )
        }
        "gambler" => {
            let budgets = budgets_to_units(&config.budgets, 1)?;
            write_grids(
                &|b0, h| Ok(scenarios::gambler(b0, h)),
                &config.horizons,
                &budgets,
                &config.output_dir,
                "",
            )
        }
        "random10" => {
            if config.seeds.is_empty() {
                return Err(Error::BadConfig("random10 needs at least one seed".into()));
            }
            let budgets = budgets_to_units(&config.budgets, 1)?;
            let mut paths = Vec::new();
            for &seed in &config.seeds {
                paths.extend(write_grids(
                    &|b0, h| sim::random_problem(10, 4, 20, b0, h, seed),
                    &config.horizons,
                    &budgets,
                    &config.output_dir,
                    &format!("_seed{seed}"),
                )?);
            }
            Ok(paths)
        }
        "file" => {
            let path = config
                .problem_file
                .as_ref()
                .ok_or_else(|| Error::BadConfig("file scenario needs problem_file".into()))?;
            let spec: ProblemSpec = serde_json::from_str(&fs::read_to_string(path)?)?;
            let template = validate_problem(&spec)?;
            let budgets = budgets_to_units(&config.budgets, template.granularity())?;
            write_grids(
                &|b0, h| {
                    SurvivalProblem::new(
                        template.outcome_space().clone(),
                        template.actions().to_vec(),
                        b0,
                        h,
                    )
                },
                &config.horizons,
                &budgets,
                &config.output_dir,
                "",
            )
        }
        other => Err(Error::BadScenario(other.to_owned())),
    }
}
