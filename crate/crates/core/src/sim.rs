//! Monte Carlo rollouts and random problem generation.
//!
//! Rollout `i` of an estimate uses the stream seed `splitmix64(seed ^ i)`, so
//! individual rollouts can be replayed in isolation.

use crate::model::{clipped_reward, ActionModel, OutcomeSpace, SurvivalProblem, Units};
use crate::solver::Policy;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// splitmix64 finalizer, used to decorrelate sequential seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RolloutStep {
    pub t: usize,
    pub budget_before: Units,
    pub action: usize,
    pub outcome: usize,
    pub clipped_reward: Units,
    pub budget_after: Units,
}

#[derive(Debug, Clone)]
pub struct RolloutTrace {
    pub seed: u64,
    pub steps: Vec<RolloutStep>,
    /// True when the budget hit zero before the horizon.
    pub terminated_early: bool,
    /// Sum of clipped rewards, in units.
    pub total_clipped: Units,
    /// Sum of raw rewards over steps taken while alive, in units.
    pub total_principal: Units,
}

/// Samples an outcome from the action's support; the support is sorted, and
/// the last entry absorbs any rounding slack.
fn sample_outcome(action: &ActionModel, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let support = action.support();
    for &(y, p) in support {
        acc += p;
        if u < acc {
            return y;
        }
    }
    support[support.len() - 1].0
}

/// Plays one episode from the start state under the given policy.
pub fn rollout(problem: &SurvivalProblem, policy: &dyn Policy, seed: u64) -> RolloutTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = problem.outcome_space();
    let mut budget = problem.initial_budget();
    let mut steps = Vec::new();
    let mut total_clipped: Units = 0;
    let mut total_principal: Units = 0;
    let mut terminated_early = false;
    for t in 1..=problem.horizon() {
        if budget <= 0 {
            terminated_early = true;
            break;
        }
        let action = policy.action(t, budget);
        let outcome = sample_outcome(problem.action(action), &mut rng);
        let r = clipped_reward(space.reward_units(outcome), budget);
        let next = budget + r;
        total_clipped += r;
        total_principal += space.reward_units(outcome);
        steps.push(RolloutStep {
            t,
            budget_before: budget,
            action,
            outcome,
            clipped_reward: r,
            budget_after: next,
        });
        budget = next;
    }
    if budget <= 0 {
        terminated_early = true;
    }
    RolloutTrace {
        seed,
        steps,
        terminated_early,
        total_clipped,
        total_principal,
    }
}

/// Aggregates over rollouts, real reward scale.
#[derive(Debug, Clone)]
pub struct RolloutStats {
    pub n: usize,
    pub mean_return: f64,
    /// Standard error of the mean return.
    pub std_error: f64,
    pub survival_rate: f64,
    pub mean_principal_return: f64,
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Runs `n` independent rollouts; rollout `i` uses seed `splitmix64(seed ^ i)`.
pub fn estimate(
    problem: &SurvivalProblem,
    policy: &dyn Policy,
    n: usize,
    seed: u64,
) -> RolloutStats {
    let g = problem.granularity() as f64;
    let (mut sum, mut sum_c) = (0.0, 0.0);
    let (mut sumsq, mut sumsq_c) = (0.0, 0.0);
    let (mut psum, mut psum_c) = (0.0, 0.0);
    let mut survived = 0usize;
    for i in 0..n {
        let trace = rollout(problem, policy, splitmix64(seed ^ i as u64));
        let x = trace.total_clipped as f64 / g;
        neumaier_add(&mut sum, &mut sum_c, x);
        neumaier_add(&mut sumsq, &mut sumsq_c, x * x);
        neumaier_add(&mut psum, &mut psum_c, trace.total_principal as f64 / g);
        if !trace.terminated_early {
            survived += 1;
        }
    }
    let nf = n as f64;
    let mean = (sum + sum_c) / nf;
    let var = ((sumsq + sumsq_c) / nf - mean * mean).max(0.0);
    let std_error = if n > 1 {
        (var * nf / (nf - 1.0)).sqrt() / nf.sqrt()
    } else {
        f64::NAN
    };
    RolloutStats {
        n,
        mean_return: mean,
        std_error,
        survival_rate: survived as f64 / nf,
        mean_principal_return: (psum + psum_c) / nf,
    }
}

/// Generates a random valid problem. Outcomes are the integer rewards
/// `-reward_span..=reward_span` (so `2 * reward_span + 1` of them, labelled
/// by their reward); each action gets `support_size` distinct outcomes with
/// simplex-uniform probabilities. Regenerates until some action has
/// non-negative expected reward.
pub fn random_problem(
    n_actions: usize,
    support_size: usize,
    reward_span: Units,
    initial_budget: Units,
    horizon: usize,
    seed: u64,
) -> Result<SurvivalProblem> {
    if n_actions == 0 || reward_span <= 0 {
        return Err(Error::BadGeneratorArgs(
            "need at least one action and a positive reward span".into(),
        ));
    }
    let n_outcomes = 2 * reward_span as usize + 1;
    if support_size == 0 || support_size > n_outcomes {
        return Err(Error::BadGeneratorArgs(format!(
            "support size {support_size} outside 1..={n_outcomes}"
        )));
    }
    let outcomes: Vec<(String, Units)> = (-reward_span..=reward_span)
        .map(|r| (format!("Y{r}"), r))
        .collect();
    let space = OutcomeSpace::new(outcomes, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    const MAX_ATTEMPTS: usize = 1000;
    for _ in 0..MAX_ATTEMPTS {
        let actions = (0..n_actions)
            .map(|i| {
                let picked = rand::seq::index::sample(&mut rng, n_outcomes, support_size);
                // normalized unit-exponential draws are simplex-uniform
                let weights: Vec<f64> = (0..support_size)
                    .map(|_| -f64::ln(1.0 - rng.gen::<f64>()))
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut support: Vec<(usize, f64)> = picked
                    .iter()
                    .zip(&weights)
                    .map(|(y, w)| (y, w / total))
                    .collect();
                // force an exact probability sum
                let slack: f64 = 1.0 - support.iter().map(|&(_, p)| p).sum::<f64>();
                support.last_mut().expect("nonempty support").1 += slack;
                ActionModel::new(format!("a{i}"), support, &space)
            })
            .collect::<Result<Vec<_>>>()?;
        match SurvivalProblem::new(space.clone(), actions, initial_budget, horizon) {
            Ok(problem) => return Ok(problem),
            Err(Error::NoViableAction) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BadGeneratorArgs(format!(
        "no viable problem found in {MAX_ATTEMPTS} attempts"
    )))
}

/// CSV export of one rollout trace.
pub fn write_trace_csv<W: Write>(
    problem: &SurvivalProblem,
    trace: &RolloutTrace,
    mut out: W,
) -> Result<()> {
    let space = problem.outcome_space();
    writeln!(
        out,
        "t,budget_before,action_label,outcome_label,clipped_reward,budget_after"
    )?;
    for s in &trace.steps {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t,
            s.budget_before,
            problem.action(s.action).label(),
            space.label(s.outcome),
            s.clipped_reward,
            s.budget_after
        )?;
    }
    Ok(())
}

/// CSV export of aggregate rollout statistics (single data row).
pub fn write_stats_csv<W: Write>(stats: &RolloutStats, mut out: W) -> Result<()> {
    use crate::fmt::sig12;
    writeln!(
        out,
        "n,mean_return,std_error,survival_rate,mean_principal_return"
    )?;
    writeln!(
        out,
        "{},{},{},{},{}",
        stats.n,
        sig12(stats.mean_return),
        sig12(stats.std_error),
        sig12(stats.survival_rate),
        sig12(stats.mean_principal_return)
    )?;
    Ok(())
}
