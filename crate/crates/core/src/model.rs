//! POMDP model, belief and alpha-vector types, plus the Bayes belief update.
//!
//! Indices are 0-based throughout this module. Only the parser and the CLI
//! translate to the 1-based state numbering used in published layouts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance for transition and observation distributions.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Sum tolerance for belief vectors.
pub const BELIEF_SUM_TOLERANCE: f64 = 1e-9;

/// A probability distribution over states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeliefVector(Vec<f64>);

impl BeliefVector {
    /// Validates that `probs` is non-negative and sums to one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidBelief("empty belief".into()));
        }
        if let Some((s, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidBelief(format!("entry {s} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > BELIEF_SUM_TOLERANCE {
            return Err(Error::InvalidBelief(format!("entries sum to {sum}")));
        }
        Ok(BeliefVector(probs))
    }

    /// Scales non-negative weights to sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidBelief(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(num_states: usize) -> Self {
        assert!(num_states > 0);
        BeliefVector(vec![1.0 / num_states as f64; num_states])
    }

    pub fn point(num_states: usize, state: usize) -> Self {
        assert!(state < num_states);
        let mut probs = vec![0.0; num_states];
        probs[state] = 1.0;
        BeliefVector(probs)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, coefficients: &[f64]) -> f64 {
        dot(&self.0, coefficients)
    }
}

impl AsRef<[f64]> for BeliefVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A value-function hyperplane with the action that attains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub action: usize,
    pub coefficients: Vec<f64>,
}

impl AlphaVector {
    pub fn new(action: usize, coefficients: Vec<f64>) -> Self {
        AlphaVector {
            action,
            coefficients,
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn value(&self, belief: &BeliefVector) -> f64 {
        dot(belief.as_slice(), &self.coefficients)
    }
}

/// A non-empty set of alpha vectors; the value at a belief is the best inner product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    alphas: Vec<AlphaVector>,
}

impl ValueFunction {
    pub fn new(alphas: Vec<AlphaVector>) -> Result<Self> {
        let first = alphas
            .first()
            .ok_or_else(|| Error::InvalidModel("value function needs at least one alpha vector".into()))?;
        let dim = first.dim();
        if let Some(bad) = alphas.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(ValueFunction { alphas })
    }

    pub fn alphas(&self) -> &[AlphaVector] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.alphas[0].dim()
    }

    /// Best value at `belief` and the lowest index attaining it.
    pub fn value_at(&self, belief: &BeliefVector) -> (f64, usize) {
        best_alpha(&self.alphas, belief.as_slice())
    }

    /// Action of the maximizing alpha vector.
    pub fn action_at(&self, belief: &BeliefVector) -> usize {
        let (_, idx) = self.value_at(belief);
        self.alphas[idx].action
    }

    /// Checks that every alpha vector is usable with `model`.
    pub fn check_compatible(&self, model: &PomdpModel) -> Result<()> {
        if self.dim() != model.num_states() {
            return Err(Error::DimensionMismatch {
                expected: model.num_states(),
                found: self.dim(),
            });
        }
        if let Some(a) = self.alphas.iter().find(|a| a.action >= model.num_actions()) {
            return Err(Error::InvalidModel(format!(
                "alpha vector action {} out of range for {} actions",
                a.action,
                model.num_actions()
            )));
        }
        Ok(())
    }
}

pub(crate) fn best_alpha(alphas: &[AlphaVector], belief: &[f64]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, alpha) in alphas.iter().enumerate() {
        let v = dot(belief, &alpha.coefficients);
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    (best, best_idx)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Optional human-readable names.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Labels {
    pub states: Option<Vec<String>>,
    pub actions: Option<Vec<String>>,
    pub observations: Option<Vec<String>>,
}

/// Dense tables for assembling a [`PomdpModel`].
///
/// The builder only checks dimensions; stochasticity is reported by
/// [`validate_model`] so that malformed models can still be inspected.
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    num_states: usize,
    num_actions: usize,
    num_observations: usize,
    /// `[a][s][s']`
    pub transition: Vec<f64>,
    /// `[a][s'][o]`
    pub observation: Vec<f64>,
    /// `[a][s][s']`
    pub reward: Vec<f64>,
    pub discount: f64,
    pub terminal_states: Vec<usize>,
    pub initial_belief: Option<Vec<f64>>,
    pub labels: Labels,
}

impl ModelBuilder {
    pub fn new(num_states: usize, num_actions: usize, num_observations: usize) -> Self {
        ModelBuilder {
            num_states,
            num_actions,
            num_observations,
            transition: vec![0.0; num_actions * num_states * num_states],
            observation: vec![0.0; num_actions * num_states * num_observations],
            reward: vec![0.0; num_actions * num_states * num_states],
            discount: 0.95,
            terminal_states: Vec::new(),
            initial_belief: None,
            labels: Labels::default(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn t_index(&self, a: usize, s: usize, s2: usize) -> usize {
        (a * self.num_states + s) * self.num_states + s2
    }

    pub fn o_index(&self, a: usize, s2: usize, o: usize) -> usize {
        (a * self.num_states + s2) * self.num_observations + o
    }

    pub fn set_transition(&mut self, a: usize, s: usize, s2: usize, p: f64) -> &mut Self {
        let i = self.t_index(a, s, s2);
        self.transition[i] = p;
        self
    }

    pub fn set_observation(&mut self, a: usize, s2: usize, o: usize, p: f64) -> &mut Self {
        let i = self.o_index(a, s2, o);
        self.observation[i] = p;
        self
    }

    pub fn set_reward(&mut self, a: usize, s: usize, s2: usize, r: f64) -> &mut Self {
        let i = self.t_index(a, s, s2);
        self.reward[i] = r;
        self
    }

    pub fn build(self) -> Result<PomdpModel> {
        let (ns, na, no) = (self.num_states, self.num_actions, self.num_observations);
        if ns == 0 || na == 0 || no == 0 {
            return Err(Error::InvalidModel(format!(
                "counts must be positive (states {ns}, actions {na}, observations {no})"
            )));
        }
        let check = |name: &str, len: usize, want: usize| {
            if len == want {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!(
                    "{name} table has {len} entries, expected {want}"
                )))
            }
        };
        check("transition", self.transition.len(), na * ns * ns)?;
        check("observation", self.observation.len(), na * ns * no)?;
        check("reward", self.reward.len(), na * ns * ns)?;
        let initial_belief = match self.initial_belief {
            Some(p) if p.len() != ns => {
                return Err(Error::DimensionMismatch {
                    expected: ns,
                    found: p.len(),
                })
            }
            // Kept raw here; validate_model reports a malformed start distribution.
            Some(p) => BeliefVector(p),
            None => BeliefVector::uniform(ns),
        };
        let mut terminal = vec![false; ns];
        let mut out_of_range = Vec::new();
        for &s in &self.terminal_states {
            match terminal.get_mut(s) {
                Some(t) => *t = true,
                None => out_of_range.push(s),
            }
        }

        let successors = (0..na * ns)
            .map(|row| {
                let base = row * ns;
                (0..ns)
                    .filter_map(|s2| {
                        let p = self.transition[base + s2];
                        (p != 0.0).then_some((s2, p))
                    })
                    .collect()
            })
            .collect();
        let emissions = (0..na * ns)
            .map(|row| {
                let base = row * no;
                (0..no)
                    .filter_map(|o| {
                        let p = self.observation[base + o];
                        (p != 0.0).then_some((o, p))
                    })
                    .collect()
            })
            .collect();
        let expected_reward = (0..na * ns)
            .map(|row| {
                let base = row * ns;
                (0..ns)
                    .map(|s2| self.transition[base + s2] * self.reward[base + s2])
                    .sum()
            })
            .collect();

        Ok(PomdpModel {
            num_states: ns,
            num_actions: na,
            num_observations: no,
            transition: self.transition,
            observation: self.observation,
            reward: self.reward,
            discount: self.discount,
            terminal,
            out_of_range_terminals: out_of_range,
            initial_belief,
            labels: self.labels,
            successors,
            emissions,
            expected_reward,
        })
    }
}

/// A finite POMDP with `R(s, a, s')` rewards and explicit terminal (goal) states.
#[derive(Clone, Debug)]
pub struct PomdpModel {
    num_states: usize,
    num_actions: usize,
    num_observations: usize,
    transition: Vec<f64>,
    observation: Vec<f64>,
    reward: Vec<f64>,
    discount: f64,
    terminal: Vec<bool>,
    out_of_range_terminals: Vec<usize>,
    initial_belief: BeliefVector,
    labels: Labels,
    // sparse views, indexed by a * num_states + s
    successors: Vec<Vec<(usize, f64)>>,
    emissions: Vec<Vec<(usize, f64)>>,
    expected_reward: Vec<f64>,
}

impl PomdpModel {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// `p(s' | s, a)`
    pub fn transition(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.transition[(a * self.num_states + s) * self.num_states + s2]
    }

    /// `p(o | s', a)`
    pub fn observation(&self, a: usize, s2: usize, o: usize) -> f64 {
        self.observation[(a * self.num_states + s2) * self.num_observations + o]
    }

    /// `R(s, a, s')`
    pub fn reward(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.reward[(a * self.num_states + s) * self.num_states + s2]
    }

    pub fn transition_row(&self, a: usize, s: usize) -> &[f64] {
        let base = (a * self.num_states + s) * self.num_states;
        &self.transition[base..base + self.num_states]
    }

    pub fn observation_row(&self, a: usize, s2: usize) -> &[f64] {
        let base = (a * self.num_states + s2) * self.num_observations;
        &self.observation[base..base + self.num_observations]
    }

    /// Non-zero entries of `p(· | s, a)`.
    pub fn successors(&self, a: usize, s: usize) -> &[(usize, f64)] {
        &self.successors[a * self.num_states + s]
    }

    /// Non-zero entries of `p(· | s', a)`.
    pub fn emissions(&self, a: usize, s2: usize) -> &[(usize, f64)] {
        &self.emissions[a * self.num_states + s2]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    pub fn min_reward(&self) -> f64 {
        self.reward.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_reward(&self) -> f64 {
        self.reward.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn terminal_states(&self) -> Vec<usize> {
        (0..self.num_states).filter(|&s| self.terminal[s]).collect()
    }

    pub fn non_terminal_states(&self) -> Vec<usize> {
        (0..self.num_states).filter(|&s| !self.terminal[s]).collect()
    }

    pub fn initial_belief(&self) -> &BeliefVector {
        &self.initial_belief
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn action_name(&self, a: usize) -> String {
        name_or_index(self.labels.actions.as_deref(), a)
    }

    pub fn state_name(&self, s: usize) -> String {
        name_or_index(self.labels.states.as_deref(), s)
    }

    pub fn observation_name(&self, o: usize) -> String {
        name_or_index(self.labels.observations.as_deref(), o)
    }

    /// Index of a named action, if labels are present.
    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.labels.actions.as_ref()?.iter().position(|n| n == name)
    }

    pub fn observation_index(&self, name: &str) -> Option<usize> {
        self.labels.observations.as_ref()?.iter().position(|n| n == name)
    }

    /// Expected immediate reward of `a` in each state: `Σ_{s'} p(s'|s,a) R(s,a,s')`.
    pub fn immediate_reward_vector(&self, a: usize) -> &[f64] {
        &self.expected_reward[a * self.num_states..(a + 1) * self.num_states]
    }

    /// Replaces the terminal-state set.
    pub fn with_terminal_states(mut self, states: &[usize]) -> Result<Self> {
        let mut terminal = vec![false; self.num_states];
        for &s in states {
            *terminal.get_mut(s).ok_or_else(|| {
                Error::InvalidModel(format!(
                    "terminal state {s} out of range for {} states",
                    self.num_states
                ))
            })? = true;
        }
        self.terminal = terminal;
        self.out_of_range_terminals.clear();
        Ok(self)
    }

    pub fn with_initial_belief(mut self, belief: BeliefVector) -> Result<Self> {
        if belief.dim() != self.num_states {
            return Err(Error::DimensionMismatch {
                expected: self.num_states,
                found: belief.dim(),
            });
        }
        self.initial_belief = belief;
        Ok(self)
    }

    /// A builder holding a copy of this model's tables.
    pub fn to_builder(&self) -> ModelBuilder {
        ModelBuilder {
            num_states: self.num_states,
            num_actions: self.num_actions,
            num_observations: self.num_observations,
            transition: self.transition.clone(),
            observation: self.observation.clone(),
            reward: self.reward.clone(),
            discount: self.discount,
            terminal_states: self.terminal_states(),
            initial_belief: Some(self.initial_belief.as_slice().to_vec()),
            labels: self.labels.clone(),
        }
    }

    /// Unnormalized updated belief `p(o|s',a) Σ_s p(s'|s,a) weights(s)` and its total.
    ///
    /// Linear in `weights`, which need not be normalized.
    pub fn predict_observe(&self, weights: &[f64], a: usize, o: usize) -> (Vec<f64>, f64) {
        let mut next = self.predict(weights, a);
        let mut total = 0.0;
        for (s2, x) in next.iter_mut().enumerate() {
            if *x != 0.0 {
                *x *= self.observation(a, s2, o);
                total += *x;
            }
        }
        (next, total)
    }

    /// `Σ_s p(s'|s,a) weights(s)` for every `s'`.
    pub fn predict(&self, weights: &[f64], a: usize) -> Vec<f64> {
        let mut next = vec![0.0; self.num_states];
        for (s, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(s2, p) in self.successors(a, s) {
                next[s2] += w * p;
            }
        }
        next
    }

    /// `Pr(o | b, a)`, the normalizer of the belief update.
    pub fn observation_probability(&self, belief: &BeliefVector, a: usize, o: usize) -> f64 {
        self.predict_observe(belief.as_slice(), a, o).1
    }

    pub(crate) fn check_action(&self, a: usize) -> Result<()> {
        if a < self.num_actions {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "action {a} out of range for {} actions",
                self.num_actions
            )))
        }
    }
}

fn name_or_index(names: Option<&[String]>, i: usize) -> String {
    names
        .and_then(|n| n.get(i).cloned())
        .unwrap_or_else(|| i.to_string())
}

/// Bayes update: `b'(s') ∝ p(o|s',a) Σ_s p(s'|s,a) b(s)`, renormalized.
pub fn belief_update(
    model: &PomdpModel,
    belief: &BeliefVector,
    action: usize,
    observation: usize,
) -> Result<BeliefVector> {
    if belief.dim() != model.num_states() {
        return Err(Error::DimensionMismatch {
            expected: model.num_states(),
            found: belief.dim(),
        });
    }
    model.check_action(action)?;
    if observation >= model.num_observations() {
        return Err(Error::InvalidModel(format!(
            "observation {observation} out of range for {} observations",
            model.num_observations()
        )));
    }
    let (mut next, total) = model.predict_observe(belief.as_slice(), action, observation);
    if !(total > 0.0) {
        return Err(Error::ImpossibleObservation {
            action,
            observation,
        });
    }
    for x in &mut next {
        *x /= total;
    }
    Ok(BeliefVector(next))
}

/// Convenience wrapper around [`PomdpModel::immediate_reward_vector`].
pub fn immediate_reward_vector(model: &PomdpModel, action: usize) -> Vec<f64> {
    model.immediate_reward_vector(action).to_vec()
}

/// One violated model invariant. Indices are 0-based; `Display` prints them 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelDiagnostic {
    TransitionRowSum {
        action: usize,
        state: usize,
        sum: f64,
    },
    TransitionNegative {
        action: usize,
        state: usize,
        next_state: usize,
        value: f64,
        sum: f64,
    },
    ObservationRowSum {
        action: usize,
        next_state: usize,
        sum: f64,
    },
    ObservationNegative {
        action: usize,
        next_state: usize,
        observation: usize,
        value: f64,
        sum: f64,
    },
    NonFiniteReward {
        action: usize,
        state: usize,
        next_state: usize,
    },
    Discount(f64),
    TerminalOutOfRange(usize),
    InitialBelief(String),
}

impl fmt::Display for ModelDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ModelDiagnostic::*;
        match *self {
            TransitionRowSum { action, state, sum } => write!(
                f,
                "transition row (action {}, state {}) sums to {sum}",
                action + 1,
                state + 1
            ),
            TransitionNegative {
                action,
                state,
                next_state,
                value,
                sum,
            } => write!(
                f,
                "transition row (action {}, state {}) has negative entry {value} at next state {} (row sum {sum})",
                action + 1,
                state + 1,
                next_state + 1
            ),
            ObservationRowSum {
                action,
                next_state,
                sum,
            } => write!(
                f,
                "observation row (action {}, next state {}) sums to {sum}",
                action + 1,
                next_state + 1
            ),
            ObservationNegative {
                action,
                next_state,
                observation,
                value,
                sum,
            } => write!(
                f,
                "observation row (action {}, next state {}) has negative entry {value} at observation {} (row sum {sum})",
                action + 1,
                next_state + 1,
                observation + 1
            ),
            NonFiniteReward {
                action,
                state,
                next_state,
            } => write!(
                f,
                "reward (state {}, action {}, next state {}) is not finite",
                state + 1,
                action + 1,
                next_state + 1
            ),
            Discount(d) => write!(f, "discount {d} outside [0, 1)"),
            TerminalOutOfRange(s) => write!(f, "terminal state {} out of range", s + 1),
            InitialBelief(ref msg) => write!(f, "initial belief: {msg}"),
        }
    }
}

fn check_row(row: &[f64]) -> Option<(Option<(usize, f64)>, f64)> {
    let sum: f64 = row.iter().sum();
    let negative = row
        .iter()
        .enumerate()
        .find(|(_, p)| **p < 0.0 || p.is_nan())
        .map(|(i, p)| (i, *p));
    if negative.is_some() || !((sum - 1.0).abs() <= ROW_SUM_TOLERANCE) {
        Some((negative, sum))
    } else {
        None
    }
}

/// Lists every violated model invariant; empty iff the model is well formed.
pub fn validate_model(model: &PomdpModel) -> Vec<ModelDiagnostic> {
    let mut out = Vec::new();
    let (ns, na) = (model.num_states(), model.num_actions());
    for a in 0..na {
        for s in 0..ns {
            if let Some((negative, sum)) = check_row(model.transition_row(a, s)) {
                out.push(match negative {
                    Some((next_state, value)) => ModelDiagnostic::TransitionNegative {
                        action: a,
                        state: s,
                        next_state,
                        value,
                        sum,
                    },
                    None => ModelDiagnostic::TransitionRowSum {
                        action: a,
                        state: s,
                        sum,
                    },
                });
            }
        }
    }
    for a in 0..na {
        for s2 in 0..ns {
            if let Some((negative, sum)) = check_row(model.observation_row(a, s2)) {
                out.push(match negative {
                    Some((observation, value)) => ModelDiagnostic::ObservationNegative {
                        action: a,
                        next_state: s2,
                        observation,
                        value,
                        sum,
                    },
                    None => ModelDiagnostic::ObservationRowSum {
                        action: a,
                        next_state: s2,
                        sum,
                    },
                });
            }
        }
    }
    for a in 0..na {
        for s in 0..ns {
            for s2 in 0..ns {
                if !model.reward(s, a, s2).is_finite() {
                    out.push(ModelDiagnostic::NonFiniteReward {
                        action: a,
                        state: s,
                        next_state: s2,
                    });
                }
            }
        }
    }
    let d = model.discount();
    if !(0.0..1.0).contains(&d) {
        out.push(ModelDiagnostic::Discount(d));
    }
    out.extend(
        model
            .out_of_range_terminals
            .iter()
            .map(|&s| ModelDiagnostic::TerminalOutOfRange(s)),
    );
    if let Err(e) = BeliefVector::new(model.initial_belief().as_slice().to_vec()) {
        out.push(ModelDiagnostic::InitialBelief(e.to_string()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build_tiger, TIGER_HEAR_LEFT, TIGER_LISTEN};
    use approx::assert_abs_diff_eq;

    /// Two states, one action, identity dynamics, one observation.
    fn static_model() -> PomdpModel {
        let mut b = ModelBuilder::new(2, 1, 2);
        b.set_transition(0, 0, 0, 1.0)
            .set_transition(0, 1, 1, 1.0)
            .set_observation(0, 0, 0, 1.0)
            .set_observation(0, 1, 0, 0.5)
            .set_observation(0, 1, 1, 0.5);
        b.build().unwrap()
    }

    #[test]
    fn tiger_listen_update() {
        let tiger = build_tiger();
        let b = BeliefVector::uniform(2);
        let next = belief_update(&tiger, &b, TIGER_LISTEN, TIGER_HEAR_LEFT).unwrap();
        // (0.5 * 0.85) / (0.5 * 0.85 + 0.5 * 0.15)
        assert_abs_diff_eq!(next.as_slice()[0], 0.85, epsilon = 1e-12);
        assert_abs_diff_eq!(next.as_slice()[1], 0.15, epsilon = 1e-12);
    }

    #[test]
    fn identity_dynamics_with_certain_observation_is_a_fixed_point() {
        let mut builder = ModelBuilder::new(3, 1, 1);
        for s in 0..3 {
            builder.set_transition(0, s, s, 1.0).set_observation(0, s, 0, 1.0);
        }
        let model = builder.build().unwrap();
        let b = BeliefVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let next = belief_update(&model, &b, 0, 0).unwrap();
        for (x, y) in next.as_slice().iter().zip(b.as_slice()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn impossible_observation_is_an_error() {
        let model = static_model();
        let b = BeliefVector::point(2, 0);
        let err = belief_update(&model, &b, 0, 1).unwrap_err();
        assert!(matches!(
            err,
            Error::ImpossibleObservation {
                action: 0,
                observation: 1
            }
        ));
    }

    #[test]
    fn tiger_validates_clean() {
        assert!(validate_model(&build_tiger()).is_empty());
    }

    #[test]
    fn short_transition_row_is_reported_with_its_sum() {
        let mut b = static_model().to_builder();
        b.set_transition(0, 0, 0, 0.5).set_transition(0, 0, 1, 0.4);
        let diags = validate_model(&b.build().unwrap());
        assert_eq!(diags.len(), 1);
        match &diags[0] {
            ModelDiagnostic::TransitionRowSum { action, state, sum } => {
                assert_eq!((*action, *state), (0, 0));
                assert_abs_diff_eq!(*sum, 0.9, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(diags[0].to_string().contains("0.9"));
    }

    #[test]
    fn negative_observation_is_reported() {
        let mut b = static_model().to_builder();
        b.set_observation(0, 1, 0, 1.1).set_observation(0, 1, 1, -0.1);
        let diags = validate_model(&b.build().unwrap());
        assert_eq!(diags.len(), 1);
        assert!(matches!(
            diags[0],
            ModelDiagnostic::ObservationNegative {
                next_state: 1,
                observation: 1,
                ..
            }
        ));
        assert!(diags[0].to_string().contains("negative"));
    }

    #[test]
    fn bad_discount_and_terminal_are_reported() {
        let mut b = static_model().to_builder();
        b.discount = 1.0;
        b.terminal_states = vec![7];
        let diags = validate_model(&b.build().unwrap());
        assert!(diags.contains(&ModelDiagnostic::Discount(1.0)));
        assert!(diags.contains(&ModelDiagnostic::TerminalOutOfRange(7)));
    }

    #[test]
    fn tiger_listen_reward_vector() {
        let tiger = build_tiger();
        assert_eq!(immediate_reward_vector(&tiger, TIGER_LISTEN), vec![-1.0, -1.0]);
    }

    #[test]
    fn zero_reward_model_has_zero_reward_vector() {
        let model = static_model();
        assert_eq!(model.immediate_reward_vector(0), &[0.0, 0.0]);
    }

    #[test]
    fn value_at_breaks_ties_toward_lowest_index() {
        let v = ValueFunction::new(vec![
            AlphaVector::new(0, vec![1.0, 0.0]),
            AlphaVector::new(1, vec![0.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(v.value_at(&BeliefVector::uniform(2)), (0.5, 0));
    }

    #[test]
    fn belief_constructor_rejects_bad_input() {
        assert!(BeliefVector::new(vec![0.5, 0.6]).is_err());
        assert!(BeliefVector::new(vec![1.5, -0.5]).is_err());
        assert!(BeliefVector::new(vec![]).is_err());
        assert!(BeliefVector::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn value_function_rejects_mixed_dimensions() {
        assert!(ValueFunction::new(vec![]).is_err());
        assert!(ValueFunction::new(vec![
            AlphaVector::new(0, vec![1.0]),
            AlphaVector::new(0, vec![1.0, 2.0]),
        ])
        .is_err());
    }
}
