//! `perseus`: sample, filter, solve, eval and experiment subcommands.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error,
//! 3 an experiment finished with failed cells.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use perseus_core::benchmarks::build_tiger;
use perseus_core::evaluator::{sample_rewards, EvalConfig, DEFAULT_MAX_STEPS};
use perseus_core::experiment::{goals_from_one_based, run_experiment, ExperimentConfig};
use perseus_core::filter::{filter_beliefs, subsample};
use perseus_core::sampler::{sample_belief_set_from, BeliefSet};
use perseus_core::solver::{solve, PolicyDocument, SolveConfig};
use perseus_core::{load_model, Error, PomdpModel, RngSeed};

#[derive(Parser)]
#[command(name = "perseus", version, about = "Point-based POMDP solving with belief filtering")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a belief set by random walk from the initial belief.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of beliefs.
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drop near-duplicate beliefs (L∞ distance below the threshold).
    Filter {
        /// Belief-set file.
        #[arg(long)]
        beliefs: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        /// Randomly keep at most this many survivors.
        #[arg(long)]
        subsample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Filtered belief-set file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// One-row CSV with input count, kept count, threshold and time.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run PERSEUS on a belief set and write the policy.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        beliefs: PathBuf,
        /// Stop when |sum V_{n+1}(B) / sum V_n(B) - 1| falls below this.
        #[arg(long)]
        convergence: Option<f64>,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Policy file (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Per-iteration trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Monte-Carlo evaluation of a policy from every non-terminal start state.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials_per_start: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Discount for the return (the model's when absent).
        #[arg(long)]
        discount: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Episode CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a filtered-versus-unfiltered comparison from a TOML config.
    Experiment {
        config: PathBuf,
        /// Report CSV; overrides the config's `output`. Stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// `.POMDP` file, or `tiger` for the built-in model.
    #[arg(long)]
    model: String,
    /// 1-based goal (terminal) states, comma separated.
    #[arg(long, value_delimiter = ',')]
    goals: Vec<usize>,
}

impl ModelArgs {
    fn load(&self) -> anyhow::Result<PomdpModel> {
        let goals = goals_from_one_based(&self.goals)?;
        let model = if self.model == "tiger" && !Path::new("tiger").exists() {
            build_tiger().with_terminal_states(&goals)?
        } else {
            load_model(&self.model, &goals).with_context(|| format!("loading {}", self.model))?
        };
        Ok(model)
    }

    fn name(&self) -> String {
        Path::new(&self.model)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.model.clone())
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sample { model, n, seed, out } => {
            let m = model.load()?;
            let set = sample_belief_set_from(&m, m.initial_belief(), n, RngSeed(seed), &model.name());
            let mut w = output(out.as_deref())?;
            set.write_to(&mut w).and_then(|_| w.flush())?;
        }
        Command::Filter {
            beliefs,
            threshold,
            subsample: target,
            seed,
            out,
            report,
        } => {
            let set = BeliefSet::load(&beliefs)?;
            let (mut kept, rep) = filter_beliefs(&set, threshold)?;
            log::info!("kept {} of {} beliefs", rep.kept_count, rep.input_count);
            if let Some(k) = target {
                if k < kept.len() {
                    kept = subsample(&kept, k, RngSeed(seed))?;
                }
            }
            if let Some(path) = report {
                rep.write_csv(output(Some(&path))?)?;
            }
            let mut w = output(out.as_deref())?;
            kept.write_to(&mut w).and_then(|_| w.flush())?;
        }
        Command::Solve {
            model,
            beliefs,
            convergence,
            max_iterations,
            time_budget,
            seed,
            out,
            trace,
        } => {
            let m = model.load()?;
            let set = BeliefSet::load(&beliefs)?;
            let mut config = SolveConfig {
                convergence_threshold: convergence,
                max_iterations,
                time_budget: time_budget.map(Duration::from_secs_f64),
                seed: RngSeed(seed),
            };
            if convergence.is_none() && max_iterations.is_none() && time_budget.is_none() {
                config.convergence_threshold = SolveConfig::default().convergence_threshold;
            }
            let result = solve(&m, &set, &config)?;
            log::info!(
                "{} iterations, {} vectors, stopped: {}",
                result.iterations,
                result.value_function.len(),
                result.stop_reason
            );
            PolicyDocument::new(&m, &result.value_function).save(&out)?;
            if let Some(path) = trace {
                result.write_trace_csv(output(Some(&path))?)?;
            }
        }
        Command::Eval {
            model,
            policy,
            trials_per_start,
            max_steps,
            discount,
            seed,
            out,
        } => {
            let m = model.load()?;
            let v = PolicyDocument::load(&policy)?.value_function_for(&m)?;
            let config = EvalConfig {
                trials_per_start,
                discount,
                max_steps_per_episode: max_steps,
                seed: RngSeed(seed),
            };
            let result = sample_rewards(&m, &v, &config)?;
            log::info!(
                "mean reward {:.4} over {} episodes",
                result.mean_reward,
                result.episodes.len()
            );
            result.write_csv(output(out.as_deref())?)?;
        }
        Command::Experiment { config, out, workers } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let report = run_experiment(&cfg, base)?;
            let target = out.or_else(|| cfg.output.as_ref().map(|p| base.join(p)));
            report.write_csv(output(target.as_deref())?)?;
            let failures = report.failures();
            if failures > 0 {
                log::error!("{failures} experiment cell(s) failed; see the error column");
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::InvalidThreshold(_) | Error::CountTooLarge { .. }) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            // core errors already print their source, so skip repeats in the chain
            let mut msg = String::new();
            for cause in e.chain() {
                let text = cause.to_string();
                if !msg.contains(&text) {
                    msg = if msg.is_empty() { text } else { format!("{msg}: {text}") };
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
