//! Fixtures for the criterion benchmarks in `benches/`.

use std::path::PathBuf;

use perseus_core::benchmarks::hallway2_goal_states;
use perseus_core::solver::{solve, SolveConfig};
use perseus_core::sampler::{sample_belief_set, BeliefSet};
use perseus_core::{load_model, PomdpModel, RngSeed, ValueFunction};

pub fn hallway2() -> PomdpModel {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/hallway2.POMDP");
    load_model(path, &hallway2_goal_states()).expect("vendored Hallway2 loads")
}

/// A belief set and the value function after `stages` PERSEUS stages on it.
pub fn warmed_up(model: &PomdpModel, beliefs: usize, stages: usize) -> (BeliefSet, ValueFunction) {
    let set = sample_belief_set(model, beliefs, RngSeed(1));
    let config = SolveConfig {
        convergence_threshold: None,
        max_iterations: Some(stages),
        time_budget: None,
        seed: RngSeed(1),
    };
    let v = solve(model, &set, &config).expect("fixture solve").value_function;
    (set, v)
}
