//! Plackett-Luce model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FitReport;
use crate::error::{Error, Result};
use crate::perm::Ranking;
use crate::relation::ValuedPreferenceRelation;

/// Smallest weight a fit may assign before renormalization.
pub const WEIGHT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PlModel {
    weights: Vec<f64>,
}

impl PlModel {
    /// Accepts any strictly positive finite weights and normalizes them to sum to one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidModel("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidModel(format!("weight {w} is not strictly positive")));
        }
        let total: f64 = weights.iter().sum();
        Ok(PlModel { weights: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn uniform(m: usize) -> Self {
        PlModel { weights: vec![1.0 / m as f64; m] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> usize {
        self.weights.len()
    }

    pub fn log_pdf(&self, pi: &Ranking) -> Result<f64> {
        if pi.len() != self.labels() {
            return Err(Error::DimensionMismatch { expected: self.labels(), found: pi.len() });
        }
        Ok(self.log_pdf_unchecked(pi))
    }

    fn log_pdf_unchecked(&self, pi: &Ranking) -> f64 {
        let mut remaining = 0.0;
        let mut log_p = 0.0;
        // Accumulate the stage denominators from the bottom of the ranking up.
        for &label in pi.order().iter().rev() {
            let v = self.weights[label];
            remaining += v;
            log_p += v.ln() - remaining.ln();
        }
        log_p
    }

    /// Closed-form Bradley-Terry marginal `v_a / (v_a + v_b)`.
    pub fn pairwise_marginal(&self, a: usize, b: usize) -> Result<f64> {
        super::check_pair(self.labels(), a, b)?;
        Ok(self.weights[a] / (self.weights[a] + self.weights[b]))
    }

    pub fn preference_relation(&self) -> Result<ValuedPreferenceRelation> {
        ValuedPreferenceRelation::from_upper(self.labels(), |a, b| self.pairwise_marginal(a, b))
    }

    /// Vase-model draw: positions are filled in order, each by a label drawn
    /// with probability proportional to its weight among the labels not yet
    /// placed. This is the accepted-draw distribution of drawing with
    /// replacement and discarding repeats.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        let m = self.labels();
        let mut remaining: Vec<usize> = (0..m).collect();
        let mut mass: f64 = self.weights.iter().sum();
        let mut order = Vec::with_capacity(m);
        while remaining.len() > 1 {
            let mut u = rng.random::<f64>() * mass;
            let mut pick = remaining.len() - 1;
            for (slot, &label) in remaining.iter().enumerate() {
                let w = self.weights[label];
                if u < w {
                    pick = slot;
                    break;
                }
                u -= w;
            }
            let label = remaining.remove(pick);
            // Recompute rather than subtract so rounding cannot drift.
            mass = remaining.iter().map(|&l| self.weights[l]).sum();
            order.push(label);
        }
        order.extend(remaining);
        Ranking::new(order).expect("draws without replacement form a permutation")
    }

    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<Ranking> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }

    pub fn fit(rankings: &[Ranking]) -> Result<(PlModel, FitReport)> {
        PlFitter::default().fit(rankings).map(|(model, report, _)| (model, report))
    }
}

/// Minorization-maximization fit of Plackett-Luce weights.
#[derive(Debug, Clone, Copy)]
pub struct PlFitter {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PlFitter {
    fn default() -> Self {
        PlFitter { tolerance: 1e-8, max_iterations: 10_000 }
    }
}

impl PlFitter {
    /// Returns the model, the report and the log-likelihood after every
    /// accepted iteration (entry 0 is the uniform starting point). The trace
    /// is non-decreasing.
    pub fn fit(&self, rankings: &[Ranking]) -> Result<(PlModel, FitReport, Vec<f64>)> {
        let m = super::common_label_count(rankings)?;
        let log_lik = |w: &[f64]| {
            let model = PlModel { weights: w.to_vec() };
            rankings.iter().map(|r| model.log_pdf_unchecked(r)).sum::<f64>()
        };

        // Number of stages each label wins (every stage but the last).
        let mut wins = vec![0.0f64; m];
        for r in rankings {
            for &label in &r.order()[..m - 1] {
                wins[label] += 1.0;
            }
        }

        let mut weights = vec![1.0 / m as f64; m];
        let mut trace = vec![log_lik(&weights)];
        let mut converged = m == 1;
        let mut iterations = 0;
        let mut floored = false;
        let mut denom = vec![0.0f64; m];
        let mut suffix = vec![0.0f64; m];
        while !converged && iterations < self.max_iterations {
            iterations += 1;
            denom.iter_mut().for_each(|d| *d = 0.0);
            for r in rankings {
                let order = r.order();
                let mut acc = 0.0;
                for t in (0..m).rev() {
                    acc += weights[order[t]];
                    suffix[t] = acc;
                }
                // Label at position p takes part in stages 0..=min(p, m - 2).
                let mut inv_sum = 0.0;
                for (p, &label) in order.iter().enumerate() {
                    if p < m - 1 {
                        inv_sum += 1.0 / suffix[p];
                    }
                    denom[label] += inv_sum;
                }
            }
            let mut next: Vec<f64> = wins.iter().zip(&denom).map(|(w, d)| w / d).collect();
            normalize(&mut next);
            floored = false;
            for w in next.iter_mut() {
                if *w < WEIGHT_FLOOR {
                    *w = WEIGHT_FLOOR;
                    floored = true;
                }
            }
            if floored {
                normalize(&mut next);
            }
            let change = next.iter().zip(&weights).map(|(new, old)| ((new - old) / old).abs()).fold(0.0, f64::max);
            // MM never lowers the likelihood, but the floor can. A step that
            // does is dropped and the previous weights are final.
            let ll = log_lik(&next);
            if ll < *trace.last().expect("trace starts non-empty") {
                converged = true;
                break;
            }
            weights = next;
            trace.push(ll);
            converged = change < self.tolerance;
        }

        let report = FitReport {
            iterations,
            converged,
            log_likelihood: *trace.last().expect("trace starts non-empty"),
            boundary_hit: floored,
        };
        Ok((PlModel { weights }, report, trace))
    }
}

fn normalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm;

    fn r(order: &[usize]) -> Ranking {
        Ranking::new(order.to_vec()).unwrap()
    }

    #[test]
    fn pdf_examples() {
        let uniform = PlModel::uniform(3);
        for pi in perm::enumerate_rankings(3).unwrap() {
            assert!((uniform.log_pdf(&pi).unwrap() - (1.0f64 / 6.0).ln()).abs() < 1e-15);
        }
        let two = PlModel::new(vec![2.0, 1.0]).unwrap();
        assert!((two.log_pdf(&r(&[0, 1])).unwrap() - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        let three = PlModel::new(vec![2.0, 1.0, 1.0]).unwrap();
        assert!((three.log_pdf(&r(&[0, 1, 2])).unwrap() - 0.25f64.ln()).abs() < 1e-15);
        assert!(three.log_pdf(&r(&[0, 1])).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(PlModel::new(vec![]).is_err());
        assert!(PlModel::new(vec![1.0, 0.0]).is_err());
        assert!(PlModel::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn bradley_terry_marginals() {
        let model = PlModel::new(vec![4.0, 2.0, 1.0]).unwrap();
        let p = model.preference_relation().unwrap();
        assert!((p.get(0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.get(0, 2) - 4.0 / 5.0).abs() < 1e-15);
        assert!((p.get(1, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert!(p.max_reciprocity_error() < 1e-15);
    }

    #[test]
    fn first_position_frequency() {
        let model = PlModel::new(vec![9.0, 0.5, 0.5]).unwrap();
        let samples = model.sample_n(20_000, 3);
        let first = samples.iter().filter(|s| s.label_at(0) == 0).count() as f64 / 20_000.0;
        assert!((first - 0.9).abs() < 0.01, "{first}");
        assert_eq!(samples, model.sample_n(20_000, 3));
    }

    #[test]
    fn fit_on_full_group_is_uniform() {
        let all: Vec<Ranking> = perm::enumerate_rankings(3).unwrap().collect();
        let (model, report) = PlModel::fit(&all).unwrap();
        assert!(report.converged);
        for w in model.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn fit_on_single_ranking_engages_floor() {
        let data = vec![r(&[1, 2, 0]); 100];
        let (model, report) = PlModel::fit(&data).unwrap();
        assert!(report.boundary_hit);
        let w = model.weights();
        assert!(w[1] > w[2] && w[2] > w[0]);
        assert!(report.iterations <= PlFitter::default().max_iterations);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert_eq!(PlModel::fit(&[]), Err(Error::EmptyInput));
        assert!(PlModel::fit(&[r(&[0, 1]), r(&[0, 1, 2])]).is_err());
    }
}
