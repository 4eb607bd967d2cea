//! Structural properties of the solved tables on randomized instances:
//! non-negative values, monotonicity in the budget, probability bounds,
//! argmax consistency of the stored policy, tie flags, and an independently
//! recomputed Bellman backup.

mod common;

use proptest::prelude::*;
use survival_mdp::solver::solve;
use survival_mdp::Units;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solved_tables_are_internally_consistent(seed in 0u64..100_000) {
        let p = common::random_instance(seed);
        let tables = solve(&p);
        for t in 1..=p.horizon() {
            let width = tables.row_width(t) as Units;
            for b in 1..width {
                let v = tables.v_units(t, b);
                prop_assert!(v >= 0.0, "negative value at t {} b {}", t, b);

                let s = tables.surv(t, b);
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s),
                    "survival {} outside [0, 1] at t {} b {}", s, t, b);

                let q: Vec<f64> = (0..p.n_actions()).map(|a| tables.q_units(t, b, a)).collect();
                let best = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let tol = 1e-12 * best.abs().max(1.0);
                let chosen = tables.policy(t, b);
                prop_assert!(best - q[chosen] <= tol,
                    "stored policy misses the argmax at t {} b {}", t, b);
                prop_assert_eq!(v, q[chosen]);
                let near = q.iter().filter(|&&x| best - x <= tol).count();
                prop_assert_eq!(tables.tie(t, b), near > 1,
                    "tie flag mismatch at t {} b {}", t, b);

                let backup = common::backup_value(&p, &tables, t, b);
                prop_assert!((backup - v).abs() <= 1e-9 * backup.abs().max(1.0),
                    "backup {} disagrees with stored value {} at t {} b {}", backup, v, t, b);
            }
        }
    }

    #[test]
    fn final_step_value_never_rises_with_budget(seed in 0u64..100_000) {
        // a larger budget only deepens the clip, so the one-step value is
        // non-increasing in b; this holds at t = T only
        let p = common::random_instance(seed);
        let tables = solve(&p);
        let t = p.horizon();
        let mut prev = f64::INFINITY;
        for b in 1..tables.row_width(t) as Units {
            let v = tables.v_units(t, b);
            prop_assert!(v <= prev + 1e-9 * v.abs().max(1.0),
                "one-step value rises with budget at b {}", b);
            prev = v;
        }
    }

    #[test]
    fn reevaluating_the_solved_policy_reproduces_its_tables(seed in 0u64..100_000) {
        let p = common::random_instance(seed);
        let tables = solve(&p);
        let eval = survival_mdp::solver::evaluate_policy(&p, &tables).unwrap();
        for t in 1..=p.horizon() {
            for b in 0..tables.row_width(t) as Units {
                prop_assert_eq!(eval.v_units(t, b), tables.v_units(t, b));
                prop_assert_eq!(eval.surv(t, b), tables.surv(t, b));
            }
        }
    }

    #[test]
    fn boundary_and_death_rows_are_absorbing(seed in 0u64..100_000) {
        let p = common::random_instance(seed);
        let tables = solve(&p);
        for t in 1..=p.horizon() {
            prop_assert_eq!(tables.v_units(t, 0), 0.0);
            prop_assert_eq!(tables.surv(t, 0), 0.0);
        }
        let end = p.horizon() + 1;
        for b in 0..tables.row_width(end) as Units {
            prop_assert_eq!(tables.v_units(end, b), 0.0);
            prop_assert_eq!(tables.surv(end, b), if b > 0 { 1.0 } else { 0.0 });
        }
    }
}
