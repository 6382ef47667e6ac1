//! Parameterized distributions over rankings and the pairwise preference
//! relations they induce.

mod mallows;
mod pl;

pub use mallows::{borda_center, expected_distance, log_normalizer, MallowsModel, THETA_MAX};
pub use pl::{PlFitter, PlModel, WEIGHT_FLOOR};

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::{self, Ranking};
use crate::relation::ValuedPreferenceRelation;

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// The spread hit its cap or a weight hit the positivity floor.
    pub boundary_hit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PreferenceModel {
    Mallows(MallowsModel),
    PlackettLuce(PlModel),
}

impl PreferenceModel {
    pub fn labels(&self) -> usize {
        match self {
            PreferenceModel::Mallows(m) => m.labels(),
            PreferenceModel::PlackettLuce(m) => m.labels(),
        }
    }

    pub fn log_pdf(&self, pi: &Ranking) -> Result<f64> {
        match self {
            PreferenceModel::Mallows(m) => m.log_pdf(pi),
            PreferenceModel::PlackettLuce(m) => m.log_pdf(pi),
        }
    }

    pub fn pairwise_marginal(&self, a: usize, b: usize) -> Result<f64> {
        match self {
            PreferenceModel::Mallows(m) => m.pairwise_marginal(a, b),
            PreferenceModel::PlackettLuce(m) => m.pairwise_marginal(a, b),
        }
    }

    pub fn preference_relation(&self) -> Result<ValuedPreferenceRelation> {
        match self {
            PreferenceModel::Mallows(m) => m.preference_relation(),
            PreferenceModel::PlackettLuce(m) => m.preference_relation(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        match self {
            PreferenceModel::Mallows(m) => m.sample(rng),
            PreferenceModel::PlackettLuce(m) => m.sample(rng),
        }
    }
}

impl From<MallowsModel> for PreferenceModel {
    fn from(m: MallowsModel) -> Self {
        PreferenceModel::Mallows(m)
    }
}

impl From<PlModel> for PreferenceModel {
    fn from(m: PlModel) -> Self {
        PreferenceModel::PlackettLuce(m)
    }
}

/// `P(a > b)` as the total probability of every ranking placing `a` ahead of
/// `b`, summed from the density. Independent of the closed-form and cached
/// routes; limited to the enumeration cap.
pub fn marginal_by_enumeration(model: &PreferenceModel, a: usize, b: usize) -> Result<f64> {
    check_pair(model.labels(), a, b)?;
    let mut total = 0.0;
    for pi in perm::enumerate_rankings(model.labels())? {
        if pi.prefers(a, b) {
            total += model.log_pdf(&pi)?.exp();
        }
    }
    Ok(total)
}

/// `sum over all rankings of exp(log_pdf)`.
pub fn total_probability(model: &PreferenceModel) -> Result<f64> {
    perm::enumerate_rankings(model.labels())?.map(|pi| model.log_pdf(&pi).map(f64::exp)).sum()
}

fn check_pair(m: usize, a: usize, b: usize) -> Result<()> {
    for idx in [a, b] {
        if idx >= m {
            return Err(Error::LabelOutOfRange { index: idx, labels: m });
        }
    }
    if a == b {
        return Err(Error::SameLabel(a));
    }
    Ok(())
}

fn common_label_count(rankings: &[Ranking]) -> Result<usize> {
    let first = rankings.first().ok_or(Error::EmptyInput)?;
    let m = first.len();
    if let Some(r) = rankings.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: r.len() });
    }
    Ok(m)
}
