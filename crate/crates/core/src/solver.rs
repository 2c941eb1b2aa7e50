//! PERSEUS randomized point-based value iteration.
//!
//! A stage backs up randomly chosen beliefs from the set, each backup
//! improving the value at many beliefs at once, until every belief's value
//! is at least what the previous value function gave it. [`solve`] repeats
//! stages until the relative change in the summed belief-set value drops
//! below a threshold, or an iteration or time budget runs out.

use std::collections::HashSet;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AlphaVector, BeliefVector, PomdpModel, ValueFunction};
use crate::rng::{stream_rng, RngSeed, SOLVER_STREAM};
use crate::sampler::BeliefSet;

/// Single alpha vector with every coefficient `min(R) / (1 - γ)`, labeled with action 0.
pub fn initial_value_function(model: &PomdpModel) -> ValueFunction {
    let value = horizon_sum(model.min_reward(), model.discount());
    ValueFunction::new(vec![AlphaVector::new(0, vec![value; model.num_states()])])
        .expect("one alpha vector")
}

/// `r / (1 - γ)`, taking γ at its shortest decimal form.
///
/// `1.0 - 0.95` is `0.050000000000000044` in binary, which would put the
/// Tiger bound at `-1999.9999999999982`. When γ has at most 15 decimal
/// digits the complement is formed exactly in integers, so
/// `-100 / (1 - 0.95)` is `-2000.0`.
pub fn horizon_sum(r: f64, gamma: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let text = format!("{gamma}");
    if let Some(frac) = text.strip_prefix("0.") {
        if frac.len() <= 15 {
            if let Ok(m) = frac.parse::<u64>() {
                let scale = 10u64.pow(frac.len() as u32);
                let scaled = r * scale as f64;
                if scaled / scale as f64 == r && (scaled.abs() as u64) < (1 << 53) {
                    return scaled / (scale - m) as f64;
                }
            }
        }
    }
    r / (1.0 - gamma)
}

/// `(max_i b·α_i, smallest maximizing i)`.
pub fn value_at(v: &ValueFunction, belief: &BeliefVector) -> (f64, usize) {
    v.value_at(belief)
}

/// Relative change `next / prev - 1` of the summed belief-set value.
pub fn convergence_metric(sum_vb_next: f64, sum_vb_prev: f64) -> Result<f64> {
    if sum_vb_prev == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(sum_vb_next / sum_vb_prev - 1.0)
}

/// `Σ_b max_α b·α` over the belief set.
pub fn belief_set_value(v: &ValueFunction, set: &BeliefSet) -> f64 {
    set.iter().map(|b| v.value_at(b).0).sum()
}

/// Backup operator for a fixed value function.
///
/// For each action the best previous alpha vector per observation is found
/// on the unnormalized successor belief `p(o|s',a) Σ_s p(s'|s,a) b(s)`,
/// which ranks `q_{a,o}^i` exactly like `b·q_{a,o}^i` does. The selected
/// vectors are then projected back through the model in one pass per action.
pub struct Backup<'a> {
    model: &'a PomdpModel,
    alphas: &'a [AlphaVector],
    num_states: usize,
    // scratch
    predicted: Vec<f64>,
    support: Vec<usize>,
    per_obs: Vec<Vec<(usize, f64)>>,
    chosen: Vec<usize>,
    projected: Vec<f64>,
}

impl<'a> Backup<'a> {
    pub fn new(model: &'a PomdpModel, v: &'a ValueFunction) -> Self {
        let ns = model.num_states();
        Backup {
            model,
            alphas: v.alphas(),
            num_states: ns,
            predicted: vec![0.0; ns],
            support: Vec::with_capacity(ns),
            per_obs: vec![Vec::new(); model.num_observations()],
            chosen: vec![0; model.num_observations()],
            projected: vec![0.0; ns],
        }
    }

    /// `argmax_a b·q_a^b` with `q_a^b = r_a + γ Σ_o argmax_i b·q_{a,o}^i`.
    pub fn backup(&mut self, belief: &BeliefVector) -> AlphaVector {
        let b = belief.as_slice();
        let mut best: Option<(f64, AlphaVector)> = None;
        for a in 0..self.model.num_actions() {
            let q = self.action_vector(b, a);
            let value = crate::model::dot(b, &q);
            if best.as_ref().is_none_or(|(v, _)| value > *v) {
                best = Some((value, AlphaVector::new(a, q)));
            }
        }
        best.expect("at least one action").1
    }

    /// `q_a^b` for one action.
    pub fn action_vector(&mut self, b: &[f64], a: usize) -> Vec<f64> {
        let model = self.model;
        let ns = self.num_states;
        self.predicted.iter_mut().for_each(|x| *x = 0.0);
        for (s, &w) in b.iter().enumerate() {
            if w != 0.0 {
                for &(s2, p) in model.successors(a, s) {
                    self.predicted[s2] += w * p;
                }
            }
        }
        self.support.clear();
        self.support
            .extend((0..ns).filter(|&s2| self.predicted[s2] != 0.0));
        for list in &mut self.per_obs {
            list.clear();
        }
        for &s2 in &self.support {
            let w = self.predicted[s2];
            for &(o, p) in model.emissions(a, s2) {
                self.per_obs[o].push((s2, w * p));
            }
        }
        for (o, list) in self.per_obs.iter().enumerate() {
            // Observations impossible under b tie at zero; the lowest index wins.
            self.chosen[o] = if list.is_empty() {
                0
            } else {
                argmax_sparse(self.alphas, list)
            };
        }
        // w(s') = Σ_o p(o|s',a) α_{chosen(o)}(s'), then q(s) = r_a(s) + γ Σ_{s'} p(s'|s,a) w(s')
        for s2 in 0..ns {
            self.projected[s2] = model
                .emissions(a, s2)
                .iter()
                .map(|&(o, p)| p * self.alphas[self.chosen[o]].coefficients[s2])
                .sum();
        }
        let gamma = model.discount();
        let rewards = model.immediate_reward_vector(a);
        (0..ns)
            .map(|s| {
                let future: f64 = model
                    .successors(a, s)
                    .iter()
                    .map(|&(s2, p)| p * self.projected[s2])
                    .sum();
                rewards[s] + gamma * future
            })
            .collect()
    }
}

fn argmax_sparse(alphas: &[AlphaVector], weights: &[(usize, f64)]) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for (i, alpha) in alphas.iter().enumerate() {
        let c = &alpha.coefficients;
        let v: f64 = weights.iter().map(|&(s, w)| w * c[s]).sum();
        if v > best {
            best = v;
            best_i = i;
        }
    }
    best_i
}

/// One backed-up alpha vector at `belief`.
pub fn backup(model: &PomdpModel, v: &ValueFunction, belief: &BeliefVector) -> AlphaVector {
    Backup::new(model, v).backup(belief)
}

/// Non-zero entries of a belief, for fast inner products.
struct SparseBelief {
    index: Vec<usize>,
    value: Vec<f64>,
}

impl SparseBelief {
    fn new(b: &BeliefVector) -> Self {
        let (index, value) = b
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(i, &p)| (i, p))
            .unzip();
        SparseBelief { index, value }
    }

    /// Same summation order as a dense dot product, skipping zero terms.
    #[inline]
    fn dot(&self, coefficients: &[f64]) -> f64 {
        self.index
            .iter()
            .zip(&self.value)
            .map(|(&i, &p)| p * coefficients[i])
            .sum()
    }
}

/// Statistics of one stage.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageStats {
    pub backups: usize,
    pub improved: usize,
}

/// One PERSEUS stage: returns `V_{n+1}` with `V_{n+1}(b) ≥ V_n(b)` for every `b` in the set.
pub fn perseus_stage<R: Rng + ?Sized>(
    model: &PomdpModel,
    set: &BeliefSet,
    v: &ValueFunction,
    rng: &mut R,
) -> ValueFunction {
    perseus_stage_with_stats(model, set, v, rng).0
}

pub fn perseus_stage_with_stats<R: Rng + ?Sized>(
    model: &PomdpModel,
    set: &BeliefSet,
    v: &ValueFunction,
    rng: &mut R,
) -> (ValueFunction, StageStats) {
    assert!(!set.is_empty(), "belief set must be non-empty");
    let sparse: Vec<SparseBelief> = set.iter().map(SparseBelief::new).collect();
    let (prev_value, prev_best): (Vec<f64>, Vec<usize>) = sparse
        .iter()
        .map(|b| {
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, alpha) in v.alphas().iter().enumerate() {
                let x = b.dot(&alpha.coefficients);
                if x > best.0 {
                    best = (x, i);
                }
            }
            best
        })
        .unzip();

    let mut current = vec![f64::NEG_INFINITY; set.len()];
    let mut pending: Vec<usize> = (0..set.len()).collect();
    let mut next: Vec<AlphaVector> = Vec::new();
    let mut seen: HashSet<(usize, Vec<u64>)> = HashSet::new();
    let mut stats = StageStats::default();
    let mut backup = Backup::new(model, v);

    while !pending.is_empty() {
        let pick = pending[rng.gen_range(0..pending.len())];
        let alpha = backup.backup(&set.beliefs[pick]);
        stats.backups += 1;
        let chosen = if sparse[pick].dot(&alpha.coefficients) >= prev_value[pick] {
            stats.improved += 1;
            alpha
        } else {
            v.alphas()[prev_best[pick]].clone()
        };
        let key = (
            chosen.action,
            chosen.coefficients.iter().map(|x| x.to_bits()).collect(),
        );
        if seen.insert(key) {
            for &j in &pending {
                let x = sparse[j].dot(&chosen.coefficients);
                if x > current[j] {
                    current[j] = x;
                }
            }
            next.push(chosen);
        }
        pending.retain(|&j| current[j] < prev_value[j]);
    }
    let v_next = ValueFunction::new(next).expect("a stage adds at least one vector");
    (v_next, stats)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Stop when `|next / prev - 1|` of the belief-set value falls below this.
    pub convergence_threshold: Option<f64>,
    pub max_iterations: Option<usize>,
    #[serde(with = "opt_secs", default)]
    pub time_budget: Option<Duration>,
    pub seed: RngSeed,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            convergence_threshold: Some(1e-4),
            max_iterations: None,
            time_budget: None,
            seed: RngSeed(0),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.convergence_threshold.is_none() && self.max_iterations.is_none() && self.time_budget.is_none() {
            return Err(Error::Config(
                "solver needs a convergence threshold, an iteration limit or a time budget".into(),
            ));
        }
        if let Some(t) = self.convergence_threshold {
            if !(t > 0.0) {
                return Err(Error::Config(format!("convergence threshold {t} must be positive")));
            }
        }
        Ok(())
    }
}

mod opt_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        let secs = Option::<f64>::deserialize(d)?;
        secs.map(|s| Duration::try_from_secs_f64(s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    TimeBudget,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max-iterations",
            StopReason::TimeBudget => "time-budget",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub policy_size: usize,
    /// Relative change of the belief-set value; infinite when the previous sum was zero
    /// and the new one is not.
    pub convergence: f64,
    pub sum_vb: f64,
    pub backups: usize,
    /// Time since the solve started.
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub value_function: ValueFunction,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    pub elapsed: Duration,
}

impl SolveResult {
    /// Trace as CSV: `iteration,policy_size,convergence,sum_vb,backups,elapsed_seconds`.
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "policy_size", "convergence", "sum_vb", "backups", "elapsed_seconds"])?;
        for r in &self.trace {
            w.write_record([
                r.iteration.to_string(),
                r.policy_size.to_string(),
                r.convergence.to_string(),
                r.sum_vb.to_string(),
                r.backups.to_string(),
                format!("{:.3}", r.elapsed.as_secs_f64()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Runs stages from the initial value function until a stopping rule fires.
pub fn solve(model: &PomdpModel, set: &BeliefSet, config: &SolveConfig) -> Result<SolveResult> {
    solve_from(model, set, config, initial_value_function(model))
}

/// Like [`solve`], starting from `v`.
pub fn solve_from(
    model: &PomdpModel,
    set: &BeliefSet,
    config: &SolveConfig,
    mut v: ValueFunction,
) -> Result<SolveResult> {
    config.validate()?;
    if set.is_empty() {
        return Err(Error::Config("belief set is empty".into()));
    }
    if set.dim() != Some(model.num_states()) {
        return Err(Error::DimensionMismatch {
            expected: model.num_states(),
            found: set.dim().unwrap_or(0),
        });
    }
    v.check_compatible(model)?;
    let started = Instant::now();
    let mut rng = stream_rng(config.seed, SOLVER_STREAM);
    let mut prev_sum = belief_set_value(&v, set);
    let mut trace = Vec::new();
    let stop_reason = loop {
        if config.max_iterations.is_some_and(|m| trace.len() >= m) {
            break StopReason::MaxIterations;
        }
        if config.time_budget.is_some_and(|t| started.elapsed() >= t) {
            break StopReason::TimeBudget;
        }
        let (next, stats) = perseus_stage_with_stats(model, set, &v, &mut rng);
        let next_sum = belief_set_value(&next, set);
        let convergence = match convergence_metric(next_sum, prev_sum) {
            Ok(c) => c,
            Err(_) if next_sum == prev_sum => 0.0,
            Err(_) => f64::INFINITY,
        };
        trace.push(IterationRecord {
            iteration: trace.len() + 1,
            policy_size: next.len(),
            convergence,
            sum_vb: next_sum,
            backups: stats.backups,
            elapsed: started.elapsed(),
        });
        log::debug!(
            "stage {}: |V| = {}, convergence {convergence:e}, backups {}",
            trace.len(),
            next.len(),
            stats.backups
        );
        v = next;
        prev_sum = next_sum;
        if config.convergence_threshold.is_some_and(|t| convergence.abs() < t) {
            break StopReason::Converged;
        }
    };
    Ok(SolveResult {
        value_function: v,
        iterations: trace.len(),
        trace,
        stop_reason,
        elapsed: started.elapsed(),
    })
}

/// Serialized policy: model dimensions, discount and the alpha vectors.
///
/// Stored as JSON with fields `format`, `num_states`, `num_actions`,
/// `discount` and `alphas` (each `{ "action": index, "coefficients": [...] }`).
/// Floating-point values round-trip exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyDocument {
    pub format: String,
    pub num_states: usize,
    pub num_actions: usize,
    pub discount: f64,
    pub alphas: Vec<AlphaVector>,
}

pub const POLICY_FORMAT: &str = "perseus-policy/1";

impl PolicyDocument {
    pub fn new(model: &PomdpModel, v: &ValueFunction) -> Self {
        PolicyDocument {
            format: POLICY_FORMAT.into(),
            num_states: model.num_states(),
            num_actions: model.num_actions(),
            discount: model.discount(),
            alphas: v.alphas().to_vec(),
        }
    }

    pub fn value_function(&self) -> Result<ValueFunction> {
        if self.format != POLICY_FORMAT {
            return Err(Error::Format {
                what: "policy",
                message: format!("unknown format tag `{}`", self.format),
            });
        }
        let v = ValueFunction::new(self.alphas.clone())?;
        if v.dim() != self.num_states {
            return Err(Error::DimensionMismatch {
                expected: self.num_states,
                found: v.dim(),
            });
        }
        Ok(v)
    }

    /// Value function after checking that it matches `model`.
    pub fn value_function_for(&self, model: &PomdpModel) -> Result<ValueFunction> {
        if self.num_states != model.num_states() || self.num_actions != model.num_actions() {
            return Err(Error::Format {
                what: "policy",
                message: format!(
                    "policy is for {} states / {} actions, model has {} / {}",
                    self.num_states,
                    self.num_actions,
                    model.num_states(),
                    model.num_actions()
                ),
            });
        }
        let v = self.value_function()?;
        v.check_compatible(model)?;
        Ok(v)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
