//! Browser bindings for the interactive demo page.
//!
//! Three operations, all JSON-string in / JSON-string out so the page needs
//! no generated glue types:
//! - [`policy_heatmap`]: first-step optimal action over a budget x horizon grid
//! - [`value_curves`]: value and survival as functions of the starting budget
//! - [`shaping_search`]: minimal outcome-avoiding reward bonus at a cell
//!
//! Errors are reported as `{"error": "..."}` rather than thrown exceptions.

use serde::Serialize;
use survival_mdp::model::{validate_problem, problem_to_spec, ProblemSpec};
use survival_mdp::{alignment, scenarios, solver, taxonomy, SurvivalProblem, Units};
use wasm_bindgen::prelude::wasm_bindgen;

fn parse(problem_json: &str) -> Result<SurvivalProblem, String> {
    let spec: ProblemSpec =
        serde_json::from_str(problem_json).map_err(|e| format!("invalid problem JSON: {e}"))?;
    validate_problem(&spec).map_err(|e| e.to_string())
}

fn render<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(value) => serde_json::to_string(&value).expect("serializable payload"),
        Err(error) => {
            #[derive(Serialize)]
            struct Failure {
                error: String,
            }
            serde_json::to_string(&Failure { error }).expect("serializable error")
        }
    }
}

/// Built-in demo problem in the external JSON format. Names: `assistant`,
/// `gambler`.
#[wasm_bindgen]
pub fn builtin_problem(name: &str, budget: i64, horizon: usize) -> String {
    let build = || -> Result<ProblemSpec, String> {
        if budget <= 0 || horizon == 0 {
            return Err("budget and horizon must be positive".into());
        }
        let problem = match name {
            "assistant" => scenarios::assistant(budget, horizon),
            "gambler" => scenarios::gambler(budget, horizon),
            other => return Err(format!("unknown builtin `{other}`")),
        };
        Ok(problem_to_spec(&problem))
    };
    render(build())
}

#[derive(Serialize)]
struct HeatmapPayload {
    horizons: Vec<usize>,
    budgets: Vec<Units>,
    action_labels: Vec<String>,
    /// cells[h][b] = action index chosen at t = 1.
    cells: Vec<Vec<u32>>,
    risk_neutral_action: u32,
    optimistic_action: u32,
}

/// First-step optimal action for every (budget, horizon) combination.
///
/// Budgets run over `1..=max_budget`, horizons over `1..=max_horizon`.
#[wasm_bindgen]
pub fn policy_heatmap(problem_json: &str, max_budget: i64, max_horizon: usize) -> String {
    let build = || -> Result<HeatmapPayload, String> {
        let base = parse(problem_json)?;
        if max_budget <= 0 || max_horizon == 0 {
            return Err("grid bounds must be positive".into());
        }
        if max_budget as u128 * max_horizon as u128 > 2_000_000 {
            return Err("grid too large for the browser demo".into());
        }
        let budgets: Vec<Units> = (1..=max_budget).collect();
        let horizons: Vec<usize> = (1..=max_horizon).collect();
        let mut cells = Vec::with_capacity(horizons.len());
        for &h in &horizons {
            let problem = SurvivalProblem::new(
                base.outcome_space().clone(),
                base.actions().to_vec(),
                max_budget,
                h,
            )
            .map_err(|e| e.to_string())?;
            let tables = solver::solve(&problem);
            cells.push(budgets.iter().map(|&b| tables.policy(1, b) as u32).collect());
        }
        Ok(HeatmapPayload {
            horizons,
            budgets,
            action_labels: base.actions().iter().map(|a| a.label().to_owned()).collect(),
            cells,
            risk_neutral_action: taxonomy::risk_neutral_action(&base) as u32,
            optimistic_action: taxonomy::optimistic_action(&base) as u32,
        })
    };
    render(build())
}

#[derive(Serialize)]
struct CurvesPayload {
    budgets: Vec<Units>,
    granularity: u32,
    value: Vec<f64>,
    survival: Vec<f64>,
    first_action: Vec<u32>,
    action_labels: Vec<String>,
}

/// Start-state value and survival probability as functions of the starting
/// budget, for a fixed horizon.
#[wasm_bindgen]
pub fn value_curves(problem_json: &str, max_budget: i64, horizon: usize) -> String {
    let build = || -> Result<CurvesPayload, String> {
        let base = parse(problem_json)?;
        if max_budget <= 0 || horizon == 0 {
            return Err("budget and horizon must be positive".into());
        }
        if max_budget as u128 * horizon as u128 > 4_000_000 {
            return Err("grid too large for the browser demo".into());
        }
        let problem = SurvivalProblem::new(
            base.outcome_space().clone(),
            base.actions().to_vec(),
            max_budget,
            horizon,
        )
        .map_err(|e| e.to_string())?;
        let tables = solver::solve(&problem);
        let budgets: Vec<Units> = (1..=max_budget).collect();
        Ok(CurvesPayload {
            granularity: problem.granularity(),
            value: budgets.iter().map(|&b| tables.v(1, b)).collect(),
            survival: budgets.iter().map(|&b| tables.surv(1, b)).collect(),
            first_action: budgets.iter().map(|&b| tables.policy(1, b) as u32).collect(),
            action_labels: base.actions().iter().map(|a| a.label().to_owned()).collect(),
            budgets,
        })
    };
    render(build())
}

/// Minimal one-step reward bonus that steers the policy away from every
/// action that can emit `avoid_outcome` at the given cell.
#[wasm_bindgen]
pub fn shaping_search(problem_json: &str, avoid_outcome: &str, t: usize, budget: i64) -> String {
    let build = || -> Result<alignment::ShapingReport, String> {
        let problem = parse(problem_json)?;
        alignment::find_shaping(&problem, avoid_outcome, t, budget).map_err(|e| e.to_string())
    };
    render(build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_roundtrips_through_the_heatmap() {
        let spec = builtin_problem("gambler", 1, 3);
        assert!(spec.contains("\"golden\""));
        let grid = policy_heatmap(&spec, 31, 10);
        let parsed: serde_json::Value = serde_json::from_str(&grid).unwrap();
        assert_eq!(parsed["action_labels"][0], "golden");
        // desperate short-horizon cell gambles, long-horizon cell does not
        assert_eq!(parsed["cells"][2][0], 0);
        assert_eq!(parsed["cells"][9][0], 1);
    }

    #[test]
    fn curves_report_known_values() {
        let spec = builtin_problem("gambler", 1, 3);
        let curves = value_curves(&spec, 5, 3);
        let parsed: serde_json::Value = serde_json::from_str(&curves).unwrap();
        assert_eq!(parsed["value"][0], 5.875);
        assert_eq!(parsed["survival"][0], 0.375);
    }

    #[test]
    fn shaping_search_finds_the_known_bonus() {
        let spec = builtin_problem("assistant", 10, 5);
        let report = shaping_search(&spec, "Y_vd", 5, 10);
        let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
        assert_eq!(parsed["bonus"], 8);
        assert_eq!(parsed["cell_action"], "a_o");
    }

    #[test]
    fn errors_come_back_as_json() {
        let out = policy_heatmap("not json", 5, 5);
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(parsed["error"].as_str().unwrap().contains("invalid problem JSON"));
        assert!(builtin_problem("nope", 1, 1).contains("error"));
    }
}
