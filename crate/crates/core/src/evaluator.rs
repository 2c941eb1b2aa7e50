//! Monte-Carlo control-quality measurement.
//!
//! Every non-terminal state is used as a start state `trials_per_start`
//! times. Each episode starts from the model's initial belief (not the true
//! start state), follows the action of the best alpha vector, and sums
//! discounted rewards until a terminal state is entered or the step cap is
//! reached. The score is the mean over all episodes.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{belief_update, PomdpModel, ValueFunction};
use crate::rng::{sample_sparse, stream_rng, RngSeed, EPISODE_STREAM_BASE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub trials_per_start: usize,
    /// Defaults to the model discount.
    pub discount: Option<f64>,
    pub max_steps_per_episode: usize,
    pub seed: RngSeed,
}

/// γ^251 < 3e-6 at γ = 0.95.
pub const DEFAULT_MAX_STEPS: usize = 251;

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            trials_per_start: 10,
            discount: None,
            max_steps_per_episode: DEFAULT_MAX_STEPS,
            seed: RngSeed(0),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_start == 0 {
            return Err(Error::Config("trials_per_start must be at least 1".into()));
        }
        if self.max_steps_per_episode == 0 {
            return Err(Error::Config("max_steps_per_episode must be at least 1".into()));
        }
        if let Some(d) = self.discount {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::Config(format!("evaluation discount {d} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Episode {
    pub start_state: usize,
    pub reward: f64,
    pub steps: usize,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub mean_reward: f64,
    /// Sample standard deviation of episode rewards (reported only).
    pub std_dev: f64,
    pub per_start_means: BTreeMap<usize, f64>,
    pub episodes: Vec<Episode>,
    pub episodes_truncated: usize,
}

impl EvalResult {
    pub fn episode_rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.reward).collect()
    }

    /// One row per episode (`kind=episode`, 1-based start state) and a final
    /// `kind=summary` row holding the episode count, mean reward and number
    /// of truncated episodes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "episode", "start_state", "reward", "steps", "truncated"])?;
        for (i, e) in self.episodes.iter().enumerate() {
            w.write_record([
                "episode".to_string(),
                (i + 1).to_string(),
                (e.start_state + 1).to_string(),
                e.reward.to_string(),
                e.steps.to_string(),
                e.truncated.to_string(),
            ])?;
        }
        w.write_record([
            "summary".to_string(),
            self.episodes.len().to_string(),
            String::new(),
            self.mean_reward.to_string(),
            self.episodes.iter().map(|e| e.steps).sum::<usize>().to_string(),
            self.episodes_truncated.to_string(),
        ])?;
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Simulates one episode from hidden state `start`.
pub fn run_episode<R: Rng + ?Sized>(
    model: &PomdpModel,
    v: &ValueFunction,
    start: usize,
    config: &EvalConfig,
    rng: &mut R,
) -> Episode {
    let gamma = config.discount.unwrap_or(model.discount());
    let mut belief = model.initial_belief().clone();
    let mut state = start;
    let mut reward = 0.0;
    let mut weight = 1.0;
    for step in 0..config.max_steps_per_episode {
        let a = v.action_at(&belief);
        let next = sample_sparse(model.successors(a, state), rng);
        let o = sample_sparse(model.emissions(a, next), rng);
        belief = match belief_update(model, &belief, a, o) {
            Ok(b) => b,
            Err(e) => {
                // Only reachable through underflow: the drawn observation has
                // positive probability under the true state.
                log::warn!("{e}; resetting the evaluation belief");
                model.initial_belief().clone()
            }
        };
        reward += model.reward(state, a, next) * weight;
        weight *= gamma;
        state = next;
        if model.is_terminal(next) {
            return Episode {
                start_state: start,
                reward,
                steps: step + 1,
                truncated: false,
            };
        }
    }
    Episode {
        start_state: start,
        reward,
        steps: config.max_steps_per_episode,
        truncated: true,
    }
}

/// Runs `trials_per_start` episodes from every non-terminal state, in state order.
///
/// Episode `e` starts in the `e / trials_per_start`-th non-terminal state
/// and draws from its own random stream, so the result does not depend on
/// the order episodes are run in.
pub fn sample_rewards(model: &PomdpModel, v: &ValueFunction, config: &EvalConfig) -> Result<EvalResult> {
    config.validate()?;
    v.check_compatible(model)?;
    let starts = model.non_terminal_states();
    if starts.is_empty() {
        return Err(Error::InvalidModel("model has no non-terminal start state".into()));
    }
    let total = starts.len() * config.trials_per_start;
    let episodes: Vec<Episode> = (0..total)
        .map(|e| {
            let mut rng = stream_rng(config.seed, EPISODE_STREAM_BASE + e as u64);
            run_episode(model, v, starts[e / config.trials_per_start], config, &mut rng)
        })
        .collect();

    let n = episodes.len() as f64;
    let mean_reward = episodes.iter().map(|e| e.reward).sum::<f64>() / n;
    let std_dev = if episodes.len() > 1 {
        (episodes.iter().map(|e| (e.reward - mean_reward).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let per_start_means = starts
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let chunk = &episodes[k * config.trials_per_start..(k + 1) * config.trials_per_start];
            (s, chunk.iter().map(|e| e.reward).sum::<f64>() / chunk.len() as f64)
        })
        .collect();
    let episodes_truncated = episodes.iter().filter(|e| e.truncated).count();
    Ok(EvalResult {
        mean_reward,
        std_dev,
        per_start_means,
        episodes,
        episodes_truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AlphaVector, ModelBuilder};

    /// Line of three cells; action 0 moves right deterministically, action 1 stays.
    /// Cell 2 is the goal and entering it pays 1.
    fn corridor() -> PomdpModel {
        let mut b = ModelBuilder::new(3, 2, 1);
        for s in 0..3 {
            b.set_transition(0, s, (s + 1).min(2), 1.0);
            b.set_transition(1, s, s, 1.0);
            for a in 0..2 {
                b.set_observation(a, s, 0, 1.0);
            }
        }
        for a in 0..2 {
            for s in 0..2 {
                b.set_reward(a, s, 2, 1.0);
            }
        }
        b.terminal_states = vec![2];
        b.discount = 0.9;
        b.build().unwrap()
    }

    fn constant_policy(action: usize) -> ValueFunction {
        ValueFunction::new(vec![AlphaVector::new(action, vec![0.0; 3])]).unwrap()
    }

    #[test]
    fn one_step_to_goal() {
        let model = corridor();
        let cfg = EvalConfig::default();
        let mut rng = stream_rng(RngSeed(0), 0);
        let ep = run_episode(&model, &constant_policy(0), 1, &cfg, &mut rng);
        assert_eq!(ep.reward, 1.0);
        assert_eq!(ep.steps, 1);
        assert!(!ep.truncated);
        let ep = run_episode(&model, &constant_policy(0), 0, &cfg, &mut rng);
        assert_eq!(ep.reward, 0.9);
        assert_eq!(ep.steps, 2);
    }

    #[test]
    fn never_reaching_the_goal_truncates_with_zero() {
        let model = corridor();
        let cfg = EvalConfig {
            max_steps_per_episode: 17,
            ..EvalConfig::default()
        };
        let mut rng = stream_rng(RngSeed(0), 0);
        let ep = run_episode(&model, &constant_policy(1), 0, &cfg, &mut rng);
        assert_eq!(ep.reward, 0.0);
        assert_eq!(ep.steps, 17);
        assert!(ep.truncated);
    }

    #[test]
    fn episode_count_and_start_order() {
        let model = corridor();
        let cfg = EvalConfig {
            trials_per_start: 3,
            ..EvalConfig::default()
        };
        let res = sample_rewards(&model, &constant_policy(0), &cfg).unwrap();
        assert_eq!(res.episodes.len(), 6);
        let starts: Vec<usize> = res.episodes.iter().map(|e| e.start_state).collect();
        assert_eq!(starts, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(res.per_start_means[&0], 0.9);
        assert_eq!(res.per_start_means[&1], 1.0);
        assert!((res.mean_reward - 0.95).abs() < 1e-12);
    }

    #[test]
    fn single_start_state() {
        let mut b = corridor().to_builder();
        b.terminal_states = vec![1, 2];
        let model = b.build().unwrap();
        let cfg = EvalConfig {
            trials_per_start: 3,
            ..EvalConfig::default()
        };
        assert_eq!(sample_rewards(&model, &constant_policy(0), &cfg).unwrap().episodes.len(), 3);
    }

    #[test]
    fn rejects_bad_config() {
        let model = corridor();
        let cfg = EvalConfig {
            trials_per_start: 0,
            ..EvalConfig::default()
        };
        assert!(sample_rewards(&model, &constant_policy(0), &cfg).is_err());
    }

    #[test]
    fn csv_summary_matches_episodes() {
        let model = corridor();
        let res = sample_rewards(&model, &constant_policy(0), &EvalConfig::default()).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let (summary, episodes) = rows.split_last().unwrap();
        let mean = episodes.iter().map(|r| r[3].parse::<f64>().unwrap()).sum::<f64>() / episodes.len() as f64;
        assert_eq!(summary[0], "summary");
        assert!((summary[3].parse::<f64>().unwrap() - mean).abs() < 1e-12);
    }
}
