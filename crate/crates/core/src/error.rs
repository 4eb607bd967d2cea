use thiserror::Error;

/// Errors surfaced by problem validation, solving and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("outcome list is empty")]
    EmptyOutcomes,
    #[error("action list is empty")]
    EmptyActions,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("action `{action}`: probabilities sum to {sum}, not 1 (tolerance 1e-12)")]
    ProbabilitySum { action: String, sum: f64 },
    #[error("action `{action}`: probability {prob} outside (0, 1]")]
    ProbabilityRange { action: String, prob: f64 },
    #[error("action `{action}`: invalid or repeated outcome index {index}")]
    BadSupportIndex { action: String, index: usize },
    #[error("reward {reward} for `{label}` is not an integer multiple of 1/{granularity} (tolerance 1e-9)")]
    RewardNotRepresentable {
        label: String,
        reward: f64,
        granularity: u32,
    },
    #[error("initial budget {budget} is negative or not representable in 1/{granularity} units")]
    BadInitialBudget { budget: f64, granularity: u32 },
    #[error("granularity must be a positive integer")]
    BadGranularity,
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("no action has non-negative expected reward")]
    NoViableAction,
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("action index {0} out of range")]
    ActionIndex(usize),
    #[error("budget is zero: the agent has already stopped")]
    ZeroBudget,
    #[error("budget {budget} outside lattice [0, {max}]")]
    BudgetOutOfRange { budget: i64, max: i64 },
    #[error("time step {t} outside 1..={max}")]
    TimeOutOfRange { t: usize, max: usize },
    #[error("survival probability is zero: conditional return undefined")]
    ZeroSurvival,
    #[error("future value bound is zero: condition not evaluable")]
    ZeroValueBound,
    #[error("budget {budget} exceeds the risk-seeking premise bound c = {c}")]
    BudgetAbovePremise { budget: i64, c: i64 },
    #[error("one-step survival gap between `{safe}` and `{risky}` is not positive ({gap})")]
    NonPositiveSurvivalGap {
        safe: String,
        risky: String,
        gap: f64,
    },
    #[error("shaping bonus search exceeded cap of {cap} units")]
    ShapingSearchCap { cap: i64 },
    #[error("invalid generator sizes: {0}")]
    BadGeneratorArgs(String),
    #[error("invalid scenario `{0}`")]
    BadScenario(String),
    #[error("config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}
