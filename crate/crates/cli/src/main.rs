use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::PathBuf;
use survival_mdp::{alignment, experiments, model, scenarios, sim, solver, taxonomy};
use survival_mdp::{SurvivalProblem, Units};

/// Exact planning and analysis for budget-constrained decision problems.
#[derive(Parser)]
#[command(name = "survival-mdp", version, about)]
struct Cli {
    /// Sweep configuration file (JSON), used by `sweep`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Random seed for simulation and generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

/// Where the problem comes from: a JSON file or a built-in scenario.
#[derive(Args)]
struct ProblemSource {
    /// Problem description file (JSON).
    #[arg(long, conflicts_with = "scenario")]
    problem: Option<PathBuf>,
    /// Built-in scenario: `assistant` or `gambler`.
    #[arg(long)]
    scenario: Option<String>,
    /// Initial budget for a built-in scenario (integer units).
    #[arg(long, default_value_t = 10)]
    budget: Units,
    /// Horizon for a built-in scenario.
    #[arg(long, default_value_t = 5)]
    horizon: usize,
}

impl ProblemSource {
    fn load(&self) -> Result<SurvivalProblem> {
        if let Some(path) = &self.problem {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let spec: model::ProblemSpec = serde_json::from_str(&text)?;
            return Ok(model::validate_problem(&spec)?);
        }
        match self.scenario.as_deref() {
            Some("assistant") => Ok(scenarios::assistant(self.budget, self.horizon)),
            Some("gambler") => Ok(scenarios::gambler(self.budget, self.horizon)),
            Some(other) => bail!("unknown scenario `{other}` (try assistant or gambler)"),
            None => bail!("provide --problem <file> or --scenario <name>"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and export the value/policy tables as CSV.
    Solve {
        #[command(flatten)]
        source: ProblemSource,
    },
    /// Classify the solved policy and evaluate behavior conditions.
    Classify {
        #[command(flatten)]
        source: ProblemSource,
        /// Also evaluate one condition: `short`, `long` or `seeking`.
        #[arg(long)]
        check: Option<String>,
        /// Time step for the condition check.
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Budget cap (short/long) or cell budget (seeking), integer units.
        #[arg(long, default_value_t = 1)]
        at_budget: Units,
    },
    /// Run a configured scenario sweep (requires --config).
    Sweep,
    /// Report the survival premium against the clip-free benchmark.
    Regret {
        #[command(flatten)]
        source: ProblemSource,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        at_budget: Units,
    },
    /// Search for a minimal reward bonus that avoids an outcome at a cell.
    Shape {
        #[command(flatten)]
        source: ProblemSource,
        /// Outcome label to avoid.
        #[arg(long)]
        avoid: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        at_budget: Units,
    },
    /// Compare the agent's policy against the principal's optimum.
    Misalign {
        #[command(flatten)]
        source: ProblemSource,
    },
    /// Monte Carlo rollouts of the optimal policy.
    Simulate {
        #[command(flatten)]
        source: ProblemSource,
        #[arg(long, default_value_t = 10_000)]
        rollouts: usize,
    },
    /// Generate a random problem and write it in the problem JSON format.
    GenRandom {
        #[arg(long, default_value_t = 10)]
        actions: usize,
        #[arg(long, default_value_t = 4)]
        support: usize,
        #[arg(long, default_value_t = 20)]
        span: Units,
        #[arg(long, default_value_t = 10)]
        budget: Units,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Solve { source } => {
            let problem = source.load()?;
            let tables = solver::solve(&problem);
            let path = cli.out.join("tables.csv");
            solver::write_tables_csv(&problem, &tables, fs::File::create(&path)?)?;
            let b0 = problem.initial_budget();
            println!(
                "value {} survival {} first action {}",
                tables.v(1, b0),
                tables.surv(1, b0),
                problem.action(tables.policy(1, b0)).label()
            );
            println!("tables written to {}", path.display());
        }
        Command::Classify { source, check, t, at_budget } => {
            let problem = source.load()?;
            let tables = solver::solve(&problem);
            let report = taxonomy::classify_behavior(&problem, &tables);
            let path = cli.out.join("behavior_grid.csv");
            taxonomy::write_behavior_csv(&problem, &report, fs::File::create(&path)?)?;
            println!(
                "risk-neutral action {}; optimistic action {}",
                problem.action(taxonomy::risk_neutral_action(&problem)).label(),
                problem.action(taxonomy::optimistic_action(&problem)).label()
            );
            println!("behavior grid written to {}", path.display());
            if let Some(which) = check {
                let report = match which.as_str() {
                    "short" => taxonomy::check_short_term_aversion(&problem, &tables, *t, *at_budget)?,
                    "long" => taxonomy::check_long_term_aversion(&problem, &tables, *t, *at_budget)?,
                    "seeking" => taxonomy::check_risk_seeking(&problem, &tables, *t, *at_budget)?,
                    other => bail!("unknown check `{other}` (short, long or seeking)"),
                };
                println!("{}", report.to_json());
            }
        }
        Command::Sweep => {
            let path = cli
                .config
                .as_ref()
                .context("sweep needs --config <file>")?;
            let mut config = experiments::ScenarioConfig::from_file(path)?;
            if cli.out != PathBuf::from(".") {
                config.output_dir = cli.out.clone();
            }
            for written in experiments::run_scenario(&config)? {
                println!("{}", written.display());
            }
        }
        Command::Regret { source, t, at_budget } => {
            let problem = source.load()?;
            let tables = solver::solve(&problem);
            let (r, rate) = experiments::regret(&problem, &tables, *t, *at_budget)?;
            println!("premium {} per-step {}", r, rate);
        }
        Command::Shape { source, avoid, t, at_budget } => {
            let problem = source.load()?;
            let report = alignment::find_shaping(&problem, avoid, *t, *at_budget)?;
            let json = report.to_json(&problem);
            fs::write(cli.out.join("shaping.json"), &json)?;
            println!("{json}");
        }
        Command::Misalign { source } => {
            let problem = source.load()?;
            let tables = solver::solve(&problem);
            let report = alignment::misalignment_report(&problem, &tables)?;
            let json = serde_json::to_string_pretty(&report)?;
            fs::write(cli.out.join("misalignment.json"), &json)?;
            println!("{json}");
        }
        Command::Simulate { source, rollouts } => {
            let problem = source.load()?;
            let tables = solver::solve(&problem);
            let stats = sim::estimate(&problem, &tables, *rollouts, cli.seed);
            let path = cli.out.join("stats.csv");
            sim::write_stats_csv(&stats, fs::File::create(&path)?)?;
            let trace = sim::rollout(&problem, &tables, sim::splitmix64(cli.seed));
            sim::write_trace_csv(&problem, &trace, fs::File::create(cli.out.join("trace.csv"))?)?;
            println!(
                "mean return {} (se {}), survival rate {}, exact value {}",
                stats.mean_return,
                stats.std_error,
                stats.survival_rate,
                tables.v(1, problem.initial_budget())
            );
        }
        Command::GenRandom { actions, support, span, budget, horizon } => {
            let problem = sim::random_problem(*actions, *support, *span, *budget, *horizon, cli.seed)?;
            let spec = model::problem_to_spec(&problem);
            let path = cli.out.join("problem.json");
            fs::write(&path, serde_json::to_string_pretty(&spec)?)?;
            println!("problem written to {}", path.display());
        }
    }
    Ok(())
}
