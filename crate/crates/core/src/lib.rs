//! Point-based POMDP solving with a belief-filtering stage.
//!
//! The pipeline is: sample a belief set by random walk ([`sampler`]), drop
//! near-duplicate beliefs ([`filter`]), run PERSEUS value iteration on what
//! is left ([`solver`]), and measure the resulting policy by Monte-Carlo
//! simulation ([`evaluator`]). [`experiment`] strings the stages together
//! and reports a comparison table.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod filter;
pub mod model;
pub mod parser;
pub mod rng;
pub mod sampler;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    belief_update, immediate_reward_vector, validate_model, AlphaVector, BeliefVector, ModelBuilder,
    ModelDiagnostic, PomdpModel, ValueFunction,
};
pub use parser::{load_model, parse_pomdp, ParseDiagnostic};
pub use rng::RngSeed;
