//! Filtered-versus-unfiltered comparison runs.
//!
//! Each `(arm, seed)` cell samples a raw belief set, optionally filters and
//! subsamples it, solves, and evaluates the policy. The report is a CSV with
//! one row per cell, preceded by the resolved configuration as `#` comments.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::benchmarks::build_tiger;
use crate::error::{Error, Result};
use crate::evaluator::{sample_rewards, EvalConfig, DEFAULT_MAX_STEPS};
use crate::filter::{filter_beliefs, subsample};
use crate::model::{BeliefVector, PomdpModel};
use crate::parser::load_model;
use crate::rng::RngSeed;
use crate::sampler::sample_belief_set_from;
use crate::solver::{solve, SolveConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSource {
    /// Path to a `.POMDP` file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// `tiger` for the built-in model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// 1-based goal (terminal) states.
    #[serde(default)]
    pub goals: Vec<usize>,
}

impl ModelSource {
    pub fn load(&self, base_dir: &Path) -> Result<PomdpModel> {
        let goals = goals_from_one_based(&self.goals)?;
        match (&self.path, self.builtin.as_deref()) {
            (Some(path), None) => load_model(base_dir.join(path), &goals),
            (None, Some("tiger")) => build_tiger().with_terminal_states(&goals),
            (None, Some(other)) => Err(Error::Config(format!("unknown built-in model `{other}`"))),
            _ => Err(Error::Config("model needs exactly one of `path` or `builtin`".into())),
        }
    }

    pub fn name(&self) -> String {
        match (&self.path, &self.builtin) {
            (Some(p), _) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            (None, Some(b)) => b.clone(),
            _ => String::new(),
        }
    }
}

/// Converts 1-based state numbers to 0-based indices.
pub fn goals_from_one_based(goals: &[usize]) -> Result<Vec<usize>> {
    goals
        .iter()
        .map(|&g| {
            g.checked_sub(1)
                .ok_or_else(|| Error::Config("state numbers are 1-based; 0 is not a state".into()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    pub name: String,
    pub raw_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_threshold: Option<f64>,
    /// Subsample the (filtered) set down to this many beliefs when it is larger.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample_target: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_seconds: Option<f64>,
    /// Expected reward to print beside the measured one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_reward: Option<f64>,
}

/// Start belief for the sampling walk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleStart {
    /// The model's initial belief.
    #[default]
    Initial,
    /// Uniform over non-terminal states.
    UniformNonTerminal,
}

fn default_trials() -> usize {
    10
}

fn default_workers() -> usize {
    1
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    #[serde(default = "default_trials")]
    pub trials_per_start: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps_per_episode: usize,
    /// Evaluation discount; the model's when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_discount: Option<f64>,
    #[serde(default)]
    pub sample_start: SampleStart,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelSource,
    pub arms: Vec<ArmConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::Config("at least one arm is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        for arm in &self.arms {
            if arm.raw_samples == 0 {
                return Err(Error::Config(format!("arm `{}`: raw_samples must be positive", arm.name)));
            }
            self.solve_config(arm, RngSeed(0))
                .validate()
                .map_err(|e| Error::Config(format!("arm `{}`: {e}", arm.name)))?;
            if let Some(t) = arm.filter_threshold {
                crate::filter::check_threshold(t)?;
            }
        }
        self.eval_config(RngSeed(0)).validate()
    }

    pub fn solve_config(&self, arm: &ArmConfig, seed: RngSeed) -> SolveConfig {
        SolveConfig {
            convergence_threshold: arm.convergence_threshold,
            max_iterations: arm.max_iterations,
            time_budget: arm.time_budget_seconds.map(Duration::from_secs_f64),
            seed,
        }
    }

    pub fn eval_config(&self, seed: RngSeed) -> EvalConfig {
        EvalConfig {
            trials_per_start: self.trials_per_start,
            discount: self.eval_discount,
            max_steps_per_episode: self.max_steps_per_episode,
            seed,
        }
    }
}

/// One report row. Columns ending in `_time` are wall-clock seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportRow {
    pub arm: String,
    pub seed: u64,
    pub raw_samples: usize,
    pub filter_threshold: Option<f64>,
    pub filter_survivors: Option<usize>,
    /// `raw`, `filtered`, `subsampled` or `filtered+subsampled`.
    pub belief_source: String,
    pub beliefs_used: Option<usize>,
    pub convergence_threshold: Option<f64>,
    pub policy_size: Option<usize>,
    pub iterations: Option<usize>,
    pub stop_reason: String,
    pub final_convergence: Option<f64>,
    pub expected_reward: Option<f64>,
    pub reward_std: Option<f64>,
    pub episodes: Option<usize>,
    pub episodes_truncated: Option<usize>,
    pub reference_reward: Option<f64>,
    pub sampling_time: String,
    pub filter_time: String,
    pub training_time: String,
    pub eval_time: String,
    pub total_time: String,
    pub error: String,
}

impl ReportRow {
    pub fn failed(&self) -> bool {
        !self.error.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failed()).count()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<report>", e);
        writeln!(out, "# resolved configuration").map_err(io)?;
        for line in self.config.to_toml().lines() {
            writeln!(out, "# {line}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Blanks every `*_time` column of a report produced by [`ExperimentReport::write_csv`].
pub fn mask_time_columns(csv_text: &str) -> String {
    let mut out = String::new();
    let mut timed: Vec<usize> = Vec::new();
    let mut header_seen = false;
    for line in csv_text.lines() {
        if line.starts_with('#') {
            out.push_str(line);
            out.push('\n');
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if !header_seen {
            header_seen = true;
            timed = fields
                .iter()
                .enumerate()
                .filter(|(_, f)| f.ends_with("_time"))
                .map(|(i, _)| i)
                .collect();
            out.push_str(line);
        } else {
            let masked: Vec<&str> = fields
                .iter()
                .enumerate()
                .map(|(i, f)| if timed.contains(&i) { "*" } else { f })
                .collect();
            out.push_str(&masked.join(","));
        }
        out.push('\n');
    }
    out
}

fn secs(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64())
}

/// Runs one `(arm, seed)` cell.
pub fn run_cell(model: &PomdpModel, model_name: &str, config: &ExperimentConfig, arm: &ArmConfig, seed: u64) -> ReportRow {
    let mut row = ReportRow {
        arm: arm.name.clone(),
        seed,
        raw_samples: arm.raw_samples,
        filter_threshold: arm.filter_threshold,
        convergence_threshold: arm.convergence_threshold,
        reference_reward: arm.reference_reward,
        ..ReportRow::default()
    };
    if let Err(e) = fill_cell(model, model_name, config, arm, RngSeed(seed), &mut row) {
        row.error = e.to_string().replace(['\n', ','], " ");
    }
    row
}

fn fill_cell(
    model: &PomdpModel,
    model_name: &str,
    config: &ExperimentConfig,
    arm: &ArmConfig,
    seed: RngSeed,
    row: &mut ReportRow,
) -> Result<()> {
    let started = Instant::now();
    let start = match config.sample_start {
        SampleStart::Initial => model.initial_belief().clone(),
        SampleStart::UniformNonTerminal => {
            let mut w = vec![0.0; model.num_states()];
            for s in model.non_terminal_states() {
                w[s] = 1.0;
            }
            BeliefVector::from_weights(w)?
        }
    };
    let raw = sample_belief_set_from(model, &start, arm.raw_samples, seed, model_name);
    let sampling = started.elapsed();
    row.sampling_time = secs(sampling);

    let filter_started = Instant::now();
    let (mut set, mut source) = match arm.filter_threshold {
        Some(t) => {
            let (kept, report) = filter_beliefs(&raw, t)?;
            row.filter_survivors = Some(report.kept_count);
            (kept, "filtered".to_string())
        }
        None => (raw, "raw".to_string()),
    };
    let filtering = filter_started.elapsed();
    if let Some(k) = arm.subsample_target {
        if k < set.len() {
            set = subsample(&set, k, seed)?;
            source = if source == "raw" {
                "subsampled".into()
            } else {
                format!("{source}+subsampled")
            };
        }
    }
    row.filter_time = secs(filtering);
    row.belief_source = source;
    row.beliefs_used = Some(set.len());

    let training_started = Instant::now();
    let solved = solve(model, &set, &config.solve_config(arm, seed))?;
    let training = training_started.elapsed();
    row.training_time = secs(training);
    row.policy_size = Some(solved.value_function.len());
    row.iterations = Some(solved.iterations);
    row.stop_reason = solved.stop_reason.to_string();
    row.final_convergence = solved.trace.last().map(|r| r.convergence);

    let eval_started = Instant::now();
    let eval = sample_rewards(model, &solved.value_function, &config.eval_config(seed))?;
    row.eval_time = secs(eval_started.elapsed());
    row.expected_reward = Some(eval.mean_reward);
    row.reward_std = Some(eval.std_dev);
    row.episodes = Some(eval.episodes.len());
    row.episodes_truncated = Some(eval.episodes_truncated);
    row.total_time = secs(started.elapsed());
    log::info!(
        "arm {} seed {}: {} beliefs, |V| = {}, {} iterations, reward {:.4}",
        arm.name,
        seed,
        set.len(),
        solved.value_function.len(),
        solved.iterations,
        eval.mean_reward
    );
    Ok(())
}

/// Runs every `(arm, seed)` cell; rows come out in arm-major, seed-minor order.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    let model = config.model.load(base_dir)?;
    let name = config.model.name();
    let cells: Vec<(&ArmConfig, u64)> = config
        .arms
        .iter()
        .flat_map(|arm| config.seeds.iter().map(move |&s| (arm, s)))
        .collect();
    let results: Mutex<Vec<Option<ReportRow>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let workers = config.workers.min(cells.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(arm, seed)) = cells.get(i) else { break };
                let row = run_cell(&model, &name, config, arm, seed);
                results.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    let rows = results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();
    Ok(ExperimentReport {
        config: config.clone(),
        rows,
    })
}
