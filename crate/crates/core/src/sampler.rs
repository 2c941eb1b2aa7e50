//! Belief-set generation by random walk.
//!
//! The walk tracks a hidden state: from `(b, s)` it picks an action
//! uniformly, draws `s' ~ p(·|s,a)` and `o ~ p(·|s',a)`, and moves to the
//! Bayes update of `b`. Entering a terminal state restarts the walk from
//! the initial belief and a freshly drawn state.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{belief_update, BeliefVector, PomdpModel};
use crate::rng::{sample_dense, sample_sparse, stream_rng, RngSeed, SAMPLER_STREAM};

/// Unnormalized updates whose entries all fall below this restart the walk.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub seeds: Vec<RngSeed>,
    pub requested: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeliefSet {
    pub beliefs: Vec<BeliefVector>,
    pub provenance: Provenance,
}

impl BeliefSet {
    pub fn new(beliefs: Vec<BeliefVector>, provenance: Provenance) -> Self {
        BeliefSet {
            beliefs,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.beliefs.first().map(BeliefVector::dim)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BeliefVector> {
        self.beliefs.iter()
    }

    /// Appends `other`, merging seeds and requested counts.
    pub fn concat(mut self, other: BeliefSet) -> Self {
        self.beliefs.extend(other.beliefs);
        self.provenance.seeds.extend(other.provenance.seeds);
        self.provenance.requested += other.provenance.requested;
        self
    }

    /// Writes the dump format: a `# count dim` comment line, then one belief
    /// per line with probabilities separated by spaces.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {} {}", self.len(), self.dim().unwrap_or(0))?;
        let mut line = String::new();
        for b in &self.beliefs {
            line.clear();
            for (i, p) in b.as_slice().iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{p}");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads the dump format. Blank lines and lines starting with `#` are skipped.
    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let bad = |message: String| Error::Format {
            what: "belief set",
            message,
        };
        let mut beliefs: Vec<BeliefVector> = Vec::new();
        for (i, line) in BufReader::new(input).lines().enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let probs = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("line {}: {e}", i + 1)))?;
            if let Some(first) = beliefs.first() {
                if probs.len() != first.dim() {
                    return Err(bad(format!(
                        "line {}: {} entries, expected {}",
                        i + 1,
                        probs.len(),
                        first.dim()
                    )));
                }
            }
            beliefs.push(BeliefVector::new(probs).map_err(|e| bad(format!("line {}: {e}", i + 1)))?);
        }
        let requested = beliefs.len();
        Ok(BeliefSet::new(
            beliefs,
            Provenance {
                requested,
                ..Provenance::default()
            },
        ))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(file)
    }
}

/// One step of the random walk.
#[derive(Clone, Debug, PartialEq)]
pub struct Successor {
    pub action: usize,
    pub next_state: usize,
    pub observation: usize,
    pub belief: BeliefVector,
}

fn draw_step<R: Rng + ?Sized>(model: &PomdpModel, s: usize, rng: &mut R) -> (usize, usize, usize) {
    let a = rng.gen_range(0..model.num_actions());
    let s2 = sample_sparse(model.successors(a, s), rng);
    let o = sample_sparse(model.emissions(a, s2), rng);
    (a, s2, o)
}

/// Uniform action, then next state and observation from the model, then a Bayes update.
pub fn sample_successor<R: Rng + ?Sized>(
    model: &PomdpModel,
    belief: &BeliefVector,
    state: usize,
    rng: &mut R,
) -> Result<Successor> {
    let (action, next_state, observation) = draw_step(model, state, rng);
    let belief = belief_update(model, belief, action, observation)?;
    Ok(Successor {
        action,
        next_state,
        observation,
        belief,
    })
}

/// Collects `n` successive beliefs of a random walk from the model's initial belief.
pub fn sample_belief_set(model: &PomdpModel, n: usize, seed: RngSeed) -> BeliefSet {
    sample_belief_set_from(model, model.initial_belief(), n, seed, "model")
}

/// Like [`sample_belief_set`] with an explicit start belief and model name for provenance.
pub fn sample_belief_set_from(
    model: &PomdpModel,
    start: &BeliefVector,
    n: usize,
    seed: RngSeed,
    model_name: &str,
) -> BeliefSet {
    let mut rng = stream_rng(seed, SAMPLER_STREAM);
    let mut beliefs = Vec::with_capacity(n);
    let mut belief = start.clone();
    let mut state = sample_dense(start.as_slice(), &mut rng);
    while beliefs.len() < n {
        let (a, s2, o) = draw_step(model, state, &mut rng);
        let (mut next, total) = model.predict_observe(belief.as_slice(), a, o);
        if next.iter().all(|&x| x < UNDERFLOW_FLOOR) || !(total > 0.0) {
            log::debug!("belief underflow after action {a}, observation {o}; restarting walk");
            belief = start.clone();
            state = sample_dense(start.as_slice(), &mut rng);
            continue;
        }
        for x in &mut next {
            *x /= total;
        }
        let next = BeliefVector::new(next).expect("normalized update is a distribution");
        beliefs.push(next.clone());
        if model.is_terminal(s2) {
            belief = start.clone();
            state = sample_dense(start.as_slice(), &mut rng);
        } else {
            belief = next;
            state = s2;
        }
    }
    BeliefSet::new(
        beliefs,
        Provenance {
            model: model_name.to_string(),
            seeds: vec![seed],
            requested: n,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::*;
    use crate::model::ModelBuilder;
    use crate::rng::stream_rng;

    #[test]
    fn single_outcome_model_returns_the_same_belief() {
        let mut b = ModelBuilder::new(2, 1, 1);
        b.set_transition(0, 0, 0, 1.0)
            .set_transition(0, 1, 1, 1.0)
            .set_observation(0, 0, 0, 1.0)
            .set_observation(0, 1, 0, 1.0);
        let model = b.build().unwrap();
        let belief = BeliefVector::new(vec![0.3, 0.7]).unwrap();
        let mut rng = stream_rng(RngSeed(3), 0);
        let step = sample_successor(&model, &belief, 1, &mut rng).unwrap();
        assert_eq!((step.action, step.next_state, step.observation), (0, 1, 0));
        assert_eq!(step.belief, belief);
    }

    #[test]
    fn tiger_listen_hears_correctly_at_the_stated_rate() {
        // Binomial check: 1e5 listen draws from tiger-left, within 3 sigma of 0.85.
        let tiger = build_tiger();
        let mut rng = stream_rng(RngSeed(11), 0);
        let b = BeliefVector::uniform(2);
        let (mut listens, mut heard_left) = (0u64, 0u64);
        while listens < 100_000 {
            let step = sample_successor(&tiger, &b, TIGER_LEFT, &mut rng).unwrap();
            if step.action == TIGER_LISTEN {
                assert_eq!(step.next_state, TIGER_LEFT);
                listens += 1;
                heard_left += (step.observation == TIGER_HEAR_LEFT) as u64;
            }
        }
        let p = heard_left as f64 / listens as f64;
        let sigma = (0.85 * 0.15 / listens as f64).sqrt();
        assert!((p - 0.85).abs() < 3.0 * sigma, "p = {p}");
    }

    #[test]
    fn empty_and_single_sets() {
        let tiger = build_tiger();
        assert!(sample_belief_set(&tiger, 0, RngSeed(1)).is_empty());
        let one = sample_belief_set(&tiger, 1, RngSeed(1));
        assert_eq!(one.len(), 1);
        // one Bayes update of the uniform belief: listening moves it to
        // (0.85, 0.15) or (0.15, 0.85); opening a door leaves it uniform
        let p = one.beliefs[0].as_slice()[0];
        assert!([0.5, 0.85, 0.15].iter().any(|x| (p - x).abs() < 1e-12), "{p}");
    }

    #[test]
    fn walk_is_deterministic_per_seed() {
        let tiger = build_tiger();
        let a = sample_belief_set(&tiger, 200, RngSeed(5));
        let b = sample_belief_set(&tiger, 200, RngSeed(5));
        let c = sample_belief_set(&tiger, 200, RngSeed(6));
        assert_eq!(a, b);
        assert_ne!(a.beliefs, c.beliefs);
    }

    #[test]
    fn dump_round_trips_exactly() {
        let tiger = build_tiger();
        let set = sample_belief_set(&tiger, 50, RngSeed(9));
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# 50 2\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 50);
        let back = BeliefSet::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.beliefs, set.beliefs);
    }

    #[test]
    fn dump_reader_rejects_bad_rows() {
        assert!(BeliefSet::read_from("0.5 0.6\n".as_bytes()).is_err());
        assert!(BeliefSet::read_from("0.5 0.5\n1.0 0.0 0.0\n".as_bytes()).is_err());
        assert!(BeliefSet::read_from("one two\n".as_bytes()).is_err());
        let ok = BeliefSet::read_from("# comment\n\n0.5 0.5\n".as_bytes()).unwrap();
        assert_eq!(ok.len(), 1);
    }

    #[test]
    fn concat_keeps_all_seeds() {
        let tiger = build_tiger();
        let a = sample_belief_set(&tiger, 3, RngSeed(1));
        let b = sample_belief_set(&tiger, 4, RngSeed(2));
        let c = a.concat(b);
        assert_eq!(c.len(), 7);
        assert_eq!(c.provenance.seeds, vec![RngSeed(1), RngSeed(2)]);
        assert_eq!(c.provenance.requested, 7);
    }
}
