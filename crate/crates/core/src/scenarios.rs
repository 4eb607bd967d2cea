//! Built-in scenario library.

use crate::model::{ActionModel, OutcomeSpace, SurvivalProblem, Units};

/// Conversation assistant: four satisfaction outcomes, three answer styles.
///
/// Rewards -100 / -20 / 1 / 10; `a_o` asks for detail (always neutral),
/// `a_m` gives a moderate answer, `a_e` an extreme one.
pub fn assistant(initial_budget: Units, horizon: usize) -> SurvivalProblem {
    let space = OutcomeSpace::new(
        vec![
            ("Y_vd".into(), -100),
            ("Y_d".into(), -20),
            ("Y_n".into(), 1),
            ("Y_s".into(), 10),
        ],
        1,
    )
    .expect("static outcome space");
    let actions = vec![
        ActionModel::new("a_o".into(), vec![(2, 1.0)], &space).expect("static action"),
        ActionModel::new("a_m".into(), vec![(1, 0.1), (3, 0.9)], &space).expect("static action"),
        ActionModel::new("a_e".into(), vec![(0, 0.05), (3, 0.95)], &space).expect("static action"),
    ];
    SurvivalProblem::new(space, actions, initial_budget, horizon).expect("static problem")
}

/// Assistant variant without the safe `a_o` action (shaping infeasibility case).
pub fn assistant_without_safe_action(initial_budget: Units, horizon: usize) -> SurvivalProblem {
    let space = OutcomeSpace::new(
        vec![
            ("Y_vd".into(), -100),
            ("Y_d".into(), -20),
            ("Y_n".into(), 1),
            ("Y_s".into(), 10),
        ],
        1,
    )
    .expect("static outcome space");
    let actions = vec![
        ActionModel::new("a_m".into(), vec![(1, 0.1), (3, 0.9)], &space).expect("static action"),
        ActionModel::new("a_e".into(), vec![(0, 0.05), (3, 0.95)], &space).expect("static action"),
    ];
    SurvivalProblem::new(space, actions, initial_budget, horizon).expect("static problem")
}

/// Two-coin gamble: a fair ±10 coin against a certain +1 payoff.
pub fn gambler(initial_budget: Units, horizon: usize) -> SurvivalProblem {
    let space = OutcomeSpace::new(
        vec![("bad".into(), -10), ("safe".into(), 1), ("good".into(), 10)],
        1,
    )
    .expect("static outcome space");
    let actions = vec![
        ActionModel::new("golden".into(), vec![(0, 0.5), (2, 0.5)], &space).expect("static action"),
        ActionModel::new("silver".into(), vec![(1, 1.0)], &space).expect("static action"),
    ];
    SurvivalProblem::new(space, actions, initial_budget, horizon).expect("static problem")
}
