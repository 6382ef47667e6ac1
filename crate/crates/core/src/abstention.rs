//! Turning valued preference relations into partial orders.
//!
//! Two routes are provided. [`predict_probabilistic`] thresholds the pairwise
//! marginals of a Mallows or Plackett-Luce model; the result is a partial
//! order for every threshold in `[0.5, 1)` and is validated, never repaired.
//! [`predict_baseline`] handles arbitrary reciprocal relations (for instance
//! ensemble vote fractions): it raises the threshold to the smallest value
//! that removes every cycle and closes the surviving edges transitively.

use std::fmt;

use crate::error::{Error, Result};
use crate::models::PreferenceModel;
use crate::relation::{PartialOrder, StrictRelation, ValuedPreferenceRelation};

/// Marginals this close to one half are treated as exact ties.
pub const TIE_SNAP: f64 = 1e-12;

/// Abstention threshold `q` in `[0.5, 1)`.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub const HALF: Threshold = Threshold(0.5);

    pub fn new(q: f64) -> Result<Self> {
        if (0.5..1.0).contains(&q) {
            Ok(Threshold(q))
        } else {
            Err(Error::InvalidThreshold(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Debug for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={}", self.0)
    }
}

impl TryFrom<f64> for Threshold {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Threshold::new(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbstentionPrediction {
    pub order: PartialOrder,
    pub requested_q: Threshold,
    pub effective_q: Threshold,
    /// Transitive closure was applied to the thresholded relation.
    pub repaired: bool,
}

fn snap(p: f64) -> f64 {
    if (p - 0.5).abs() <= TIE_SNAP {
        0.5
    } else {
        p
    }
}

/// Keeps the pairs with `P[i][j] > q` (strictly).
///
/// Fails only if rounding noise in a non-reciprocal input would assert both
/// directions of a pair.
pub fn threshold_relation(p: &ValuedPreferenceRelation, q: Threshold) -> Result<StrictRelation> {
    StrictRelation::from_fn(p.labels(), |i, j| snap(p.get(i, j)) > q.0)
}

/// Thresholds model-induced marginals. The output is checked as a partial
/// order; a failure indicates a bug or numerical pathology and is reported as
/// [`Error::InvariantViolation`].
pub fn predict_probabilistic(model: &PreferenceModel, q: Threshold) -> Result<AbstentionPrediction> {
    let p = model.preference_relation()?;
    predict_from_model_relation(&p, q)
}

/// Same as [`predict_probabilistic`] for a relation already computed from a model.
pub fn predict_from_model_relation(p: &ValuedPreferenceRelation, q: Threshold) -> Result<AbstentionPrediction> {
    let relation =
        threshold_relation(p, q).map_err(|e| Error::InvariantViolation(format!("thresholded model relation: {e}")))?;
    let order = PartialOrder::try_from(relation)
        .map_err(|e| Error::InvariantViolation(format!("thresholded model relation: {e}")))?;
    Ok(AbstentionPrediction { order, requested_q: q, effective_q: q, repaired: false })
}

/// Candidate thresholds: one half plus every distinct off-diagonal value in `[0.5, 1)`, ascending.
pub fn threshold_candidates(p: &ValuedPreferenceRelation) -> Vec<f64> {
    let mut candidates: Vec<f64> = std::iter::once(0.5)
        .chain(p.off_diagonal().map(|(_, _, v)| snap(v)).filter(|v| (0.5..1.0).contains(v)))
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    candidates
}

fn feasible(p: &ValuedPreferenceRelation, q: f64) -> Result<bool> {
    Ok(!threshold_relation(p, Threshold(q))?.has_cycle())
}

/// Smallest candidate threshold whose thresholded relation is acyclic.
///
/// Raising `q` only removes edges, so feasibility is monotone and a binary
/// search over the sorted candidates finds the boundary. Fails with
/// [`Error::NoFeasibleThreshold`] when a cycle consists of unanimous
/// (`P = 1`) pairs, which no threshold below one can break.
pub fn find_q_min(p: &ValuedPreferenceRelation) -> Result<Threshold> {
    let candidates = threshold_candidates(p);
    let last = *candidates.last().expect("0.5 is always a candidate");
    if !feasible(p, last)? {
        return Err(Error::NoFeasibleThreshold);
    }
    // Invariant: candidates[hi] feasible; everything below lo infeasible.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(p, candidates[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Threshold(candidates[hi]))
}

/// Thresholds at `max(q, q_min)` and repairs non-transitive output by closure.
pub fn predict_baseline(p: &ValuedPreferenceRelation, q: Threshold) -> Result<AbstentionPrediction> {
    let q_min = find_q_min(p)?;
    let effective_q = if q_min.0 > q.0 { q_min } else { q };
    let relation = threshold_relation(p, effective_q)?;
    let (order, repaired) = if relation.is_transitive() {
        (PartialOrder::try_from(relation)?, false)
    } else {
        (relation.transitive_closure()?, true)
    };
    Ok(AbstentionPrediction { order, requested_q: q, effective_q, repaired })
}
