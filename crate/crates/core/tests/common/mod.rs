//! Independent reference computations shared by the integration tests.
//!
//! Nothing here goes through the solver's sparse paths: backups are done by
//! exhaustive enumeration straight from the dense model accessors, and the
//! Tiger value comes from exact value iteration over lines on [0, 1].

#![allow(dead_code)]

use std::path::PathBuf;

use perseus_core::benchmarks::hallway2_goal_states;
use perseus_core::{load_model, AlphaVector, BeliefVector, ModelBuilder, PomdpModel, ValueFunction};
use rand::Rng;

pub fn hallway2_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/hallway2.POMDP")
}

pub fn hallway2() -> PomdpModel {
    load_model(hallway2_path(), &hallway2_goal_states()).expect("vendored Hallway2 loads")
}

/// Random distribution over `n` outcomes; roughly a third of entries are zero.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.35) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|x| x / total).collect();
        }
    }
}

pub fn random_model<R: Rng>(rng: &mut R, states: usize, actions: usize, observations: usize) -> PomdpModel {
    let mut b = ModelBuilder::new(states, actions, observations);
    for a in 0..actions {
        for s in 0..states {
            for (s2, p) in random_distribution(rng, states).into_iter().enumerate() {
                b.set_transition(a, s, s2, p);
            }
            for (o, p) in random_distribution(rng, observations).into_iter().enumerate() {
                b.set_observation(a, s, o, p);
            }
            for s2 in 0..states {
                b.set_reward(a, s, s2, rng.gen_range(-10.0..10.0));
            }
        }
    }
    b.discount = rng.gen_range(0.0..0.99);
    b.build().expect("random tables are well formed")
}

pub fn random_belief<R: Rng>(rng: &mut R, states: usize) -> BeliefVector {
    BeliefVector::new(random_distribution(rng, states)).unwrap()
}

pub fn random_value_function<R: Rng>(rng: &mut R, states: usize, actions: usize, size: usize) -> ValueFunction {
    ValueFunction::new(
        (0..size)
            .map(|_| {
                AlphaVector::new(
                    rng.gen_range(0..actions),
                    (0..states).map(|_| rng.gen_range(-50.0..50.0)).collect(),
                )
            })
            .collect(),
    )
    .unwrap()
}

/// `max` over actions and over every assignment of one vector of `v` per
/// observation of `b · (r_a + γ Σ_o g_{a,o,k_o})`.
pub fn brute_force_backup_value(model: &PomdpModel, v: &ValueFunction, b: &BeliefVector) -> f64 {
    let (ns, na, no) = (model.num_states(), model.num_actions(), model.num_observations());
    let k = v.len();
    let mut best = f64::NEG_INFINITY;
    for a in 0..na {
        // g[o][i][s] = Σ_s' T(s,a,s') O(a,s',o) α_i(s')
        let g: Vec<Vec<Vec<f64>>> = (0..no)
            .map(|o| {
                v.alphas()
                    .iter()
                    .map(|alpha| {
                        (0..ns)
                            .map(|s| {
                                (0..ns)
                                    .map(|s2| {
                                        model.transition(s, a, s2)
                                            * model.observation(a, s2, o)
                                            * alpha.coefficients[s2]
                                    })
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let reward: Vec<f64> = (0..ns)
            .map(|s| (0..ns).map(|s2| model.transition(s, a, s2) * model.reward(s, a, s2)).sum())
            .collect();
        let mut choice = vec![0usize; no];
        loop {
            let value: f64 = (0..ns)
                .map(|s| {
                    let future: f64 = (0..no).map(|o| g[o][choice[o]][s]).sum();
                    b.as_slice()[s] * (reward[s] + model.discount() * future)
                })
                .sum();
            best = best.max(value);
            // odometer over choice ∈ {0..k}^no
            let mut d = 0;
            while d < no {
                choice[d] += 1;
                if choice[d] < k {
                    break;
                }
                choice[d] = 0;
                d += 1;
            }
            if d == no {
                break;
            }
        }
    }
    best
}

/// A line `p ↦ p·left + (1−p)·right` over `p = P(tiger-left)`.
#[derive(Clone, Copy, Debug)]
struct Line {
    left: f64,
    right: f64,
}

impl Line {
    fn at(&self, p: f64) -> f64 {
        p * self.left + (1.0 - p) * self.right
    }

    fn slope(&self) -> f64 {
        self.left - self.right
    }
}

/// Lines that attain the maximum somewhere on [0, 1], walked left to right.
fn upper_envelope(lines: &[Line]) -> Vec<Line> {
    let tol = 1e-12;
    let mut out = Vec::new();
    let mut p = 0.0;
    // start with the best line at p = 0, steepest on ties
    let mut current = *lines
        .iter()
        .max_by(|a, b| (a.at(0.0), a.slope()).partial_cmp(&(b.at(0.0), b.slope())).unwrap())
        .unwrap();
    loop {
        out.push(current);
        let mut next: Option<(f64, Line)> = None;
        for l in lines {
            let ds = l.slope() - current.slope();
            if ds <= tol {
                continue;
            }
            let q = (current.right - l.right) / ds;
            if q < p - tol || q >= 1.0 {
                continue;
            }
            let better = match next {
                None => true,
                Some((nq, nl)) => q < nq - tol || ((q - nq).abs() <= tol && l.slope() > nl.slope()),
            };
            if better {
                next = Some((q.max(p), *l));
            }
        }
        match next {
            Some((q, l)) => {
                p = q;
                current = l;
            }
            None => return out,
        }
    }
}

/// Optimal Tiger value at `p = P(tiger-left)` by exact value iteration over
/// `horizon` steps from the zero value function.
///
/// Works directly from the Tiger parameters: listen accuracy `0.85`,
/// listen `-1`, wrong door `-100`, right door `+10`, doors reset uniformly.
pub fn tiger_exact_value(p: f64, gamma: f64, horizon: usize) -> f64 {
    let acc = 0.85;
    let mut v = vec![Line { left: 0.0, right: 0.0 }];
    for _ in 0..horizon {
        let mut candidates = Vec::new();
        // listen: state is unchanged; hear-left with acc in tiger-left
        for x in &v {
            for y in &v {
                // x answers hear-left, y answers hear-right
                let left = -1.0 + gamma * (acc * x.left + (1.0 - acc) * y.left);
                let right = -1.0 + gamma * ((1.0 - acc) * x.right + acc * y.right);
                candidates.push(Line { left, right });
            }
        }
        // opening resets to uniform and both observations are equally likely,
        // so the continuation is the best line at the uniform belief
        let reset = v.iter().map(|l| l.at(0.5)).fold(f64::NEG_INFINITY, f64::max);
        candidates.push(Line {
            left: -100.0 + gamma * reset,
            right: 10.0 + gamma * reset,
        });
        candidates.push(Line {
            left: 10.0 + gamma * reset,
            right: -100.0 + gamma * reset,
        });
        v = upper_envelope(&candidates);
    }
    v.iter().map(|l| l.at(p)).fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest horizon `T` with `γ^T · max|R| / (1 − γ) < eps`.
pub fn horizon_for(gamma: f64, max_abs_reward: f64, eps: f64) -> usize {
    let mut t = 0;
    while gamma.powi(t as i32) * max_abs_reward / (1.0 - gamma) >= eps {
        t += 1;
    }
    t
}
