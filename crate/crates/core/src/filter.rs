//! Near-duplicate belief elimination.
//!
//! Two beliefs are similar when their L∞ (Chebyshev) distance is strictly
//! below a threshold. The filter scans the set in order and keeps a belief
//! only if it is not similar to any belief kept before it.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::index;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::BeliefVector;
use crate::rng::{stream_rng, RngSeed, SUBSAMPLE_STREAM};
use crate::sampler::BeliefSet;

#[derive(Clone, Debug, PartialEq)]
pub struct FilterReport {
    pub input_count: usize,
    pub kept_count: usize,
    pub threshold: f64,
    pub elapsed: Duration,
    /// Original positions of the survivors, strictly increasing.
    pub kept_indices: Vec<usize>,
}

#[derive(Serialize)]
struct FilterRow {
    input_count: usize,
    kept_count: usize,
    threshold: f64,
    elapsed_seconds: String,
}

impl FilterReport {
    /// Writes a header and a single CSV row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.serialize(FilterRow {
            input_count: self.input_count,
            kept_count: self.kept_count,
            threshold: self.threshold,
            elapsed_seconds: format!("{:.3}", self.elapsed.as_secs_f64()),
        })?;
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

/// True iff `max_s |a(s) - b(s)| < threshold`.
pub fn is_similar(a: &BeliefVector, b: &BeliefVector, threshold: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    check_threshold(threshold)?;
    Ok(within(a.as_slice(), b.as_slice(), threshold))
}

/// L∞ distance below `threshold`, stopping at the first coordinate that reaches it.
#[inline]
fn within(a: &[f64], b: &[f64], threshold: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < threshold)
}

pub fn chebyshev_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Greedy first-survivor filter.
///
/// Candidate comparisons are restricted to kept beliefs whose value on one
/// pivot coordinate lies within `threshold` of the candidate's, which never
/// discards a similar pair because L∞ bounds every coordinate difference.
/// The pivot is the coordinate with the largest spread over the set.
pub fn filter_beliefs(set: &BeliefSet, threshold: f64) -> Result<(BeliefSet, FilterReport)> {
    check_threshold(threshold)?;
    check_dims(set)?;
    let started = Instant::now();
    let pivot = pivot_coordinate(set);
    // Beliefs are non-negative, so f64 bit patterns sort like the values.
    let mut by_pivot: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let mut kept: Vec<usize> = Vec::new();
    for (i, b) in set.beliefs.iter().enumerate() {
        let probs = b.as_slice();
        let key = probs.get(pivot).copied().unwrap_or(0.0);
        let lo = (key - threshold).max(0.0);
        let hi = key + threshold;
        let duplicate = by_pivot
            .range(lo.to_bits()..=hi.to_bits())
            .flat_map(|(_, idx)| idx)
            .any(|&k| within(set.beliefs[k].as_slice(), probs, threshold));
        if !duplicate {
            by_pivot.entry(key.to_bits()).or_default().push(i);
            kept.push(i);
        }
    }
    Ok(finish(set, threshold, kept, started.elapsed()))
}

/// Reference O(n²) scan against every kept belief.
pub fn filter_beliefs_plain(set: &BeliefSet, threshold: f64) -> Result<(BeliefSet, FilterReport)> {
    check_threshold(threshold)?;
    check_dims(set)?;
    let started = Instant::now();
    let mut kept: Vec<usize> = Vec::new();
    for (i, b) in set.beliefs.iter().enumerate() {
        let duplicate = kept
            .iter()
            .any(|&k| within(set.beliefs[k].as_slice(), b.as_slice(), threshold));
        if !duplicate {
            kept.push(i);
        }
    }
    Ok(finish(set, threshold, kept, started.elapsed()))
}

fn check_dims(set: &BeliefSet) -> Result<()> {
    if let Some(dim) = set.dim() {
        if let Some(b) = set.beliefs.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
    }
    Ok(())
}

fn pivot_coordinate(set: &BeliefSet) -> usize {
    let Some(dim) = set.dim() else { return 0 };
    let n = set.len() as f64;
    let mut best = (0, f64::NEG_INFINITY);
    for s in 0..dim {
        let mean = set.beliefs.iter().map(|b| b.as_slice()[s]).sum::<f64>() / n;
        let var = set
            .beliefs
            .iter()
            .map(|b| (b.as_slice()[s] - mean).powi(2))
            .sum::<f64>();
        if var > best.1 {
            best = (s, var);
        }
    }
    best.0
}

fn finish(set: &BeliefSet, threshold: f64, kept: Vec<usize>, elapsed: Duration) -> (BeliefSet, FilterReport) {
    let beliefs = kept.iter().map(|&i| set.beliefs[i].clone()).collect();
    let report = FilterReport {
        input_count: set.len(),
        kept_count: kept.len(),
        threshold,
        elapsed,
        kept_indices: kept,
    };
    (BeliefSet::new(beliefs, set.provenance.clone()), report)
}

/// Uniform random subset of size `k`, in original order.
pub fn subsample(set: &BeliefSet, k: usize, seed: RngSeed) -> Result<BeliefSet> {
    if k > set.len() {
        return Err(Error::CountTooLarge {
            requested: k,
            available: set.len(),
        });
    }
    let mut rng = stream_rng(seed, SUBSAMPLE_STREAM);
    let mut picked = index::sample(&mut rng, set.len(), k).into_vec();
    picked.sort_unstable();
    let beliefs = picked.into_iter().map(|i| set.beliefs[i].clone()).collect();
    Ok(BeliefSet::new(beliefs, set.provenance.clone()))
}
