//! Seeded synthetic label-ranking data.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::learners::Dataset;
use crate::models::{MallowsModel, PlModel, THETA_MAX};
use crate::perm::Ranking;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `v(x) ∝ exp(W x)` with `W_ij ~ N(0, weight_scale^2)`; one PL draw per instance.
    PlLinear { weight_scale: f64 },
    /// Features fall into the Voronoi cell of one of `regions` random
    /// centroids; each cell has its own center ranking, and rankings are
    /// Mallows draws with spread `theta` around it.
    MallowsRegions { regions: usize, theta: f64 },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::PlLinear { .. } => "pl-linear",
            Generator::MallowsRegions { .. } => "mallows-regions",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    PlLinear,
    MallowsRegions,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pl-linear" => Ok(GeneratorKind::PlLinear),
            "mallows-regions" => Ok(GeneratorKind::MallowsRegions),
            other => Err(Error::InvalidConfig(format!("unknown generator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub generator: Generator,
    pub instances: usize,
    pub labels: usize,
    pub dims: usize,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.instances == 0 || self.labels < 2 || self.dims == 0 {
            return bad(format!(
                "need N >= 1, M >= 2, d >= 1 (got N={}, M={}, d={})",
                self.instances, self.labels, self.dims
            ));
        }
        match self.generator {
            Generator::PlLinear { weight_scale } if !(weight_scale.is_finite() && weight_scale >= 0.0) => {
                bad(format!("weight scale {weight_scale} must be finite and non-negative"))
            }
            Generator::MallowsRegions { regions: 0, .. } => bad("need at least one region".into()),
            Generator::MallowsRegions { theta, .. } if !(0.0..=THETA_MAX).contains(&theta) => {
                bad(format!("theta {theta} outside [0, {THETA_MAX}]"))
            }
            _ => Ok(()),
        }
    }
}

pub fn label_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("L{i}")).collect()
}

pub fn feature_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("x{i}")).collect()
}

fn normal_vec(len: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}

pub fn synth(spec: &SynthSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let SynthSpec { instances: n, labels: m, dims: d, .. } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n);
    let mut rankings = Vec::with_capacity(n);
    match spec.generator {
        Generator::PlLinear { weight_scale } => {
            let w = normal_vec(m * d, weight_scale, &mut rng);
            for _ in 0..n {
                let x = normal_vec(d, 1.0, &mut rng);
                let scores: Vec<f64> =
                    w.chunks_exact(d).map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
                let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let model = PlModel::new(scores.iter().map(|s| (s - top).exp()).collect())?;
                rankings.push(model.sample(&mut rng));
                features.push(x);
            }
        }
        Generator::MallowsRegions { regions, theta } => {
            let centroids: Vec<Vec<f64>> = (0..regions).map(|_| normal_vec(d, 1.0, &mut rng)).collect();
            let models = (0..regions)
                .map(|_| MallowsModel::new(Ranking::random(m, &mut rng), theta))
                .collect::<Result<Vec<_>>>()?;
            for _ in 0..n {
                let x = normal_vec(d, 1.0, &mut rng);
                let region = nearest(&centroids, &x);
                rankings.push(models[region].sample(&mut rng));
                features.push(x);
            }
        }
    }
    Dataset::new(features, rankings, label_names(m), feature_names(d))
}

/// Index of the closest centroid; ties to the lower index.
pub fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> usize {
    let dist = |c: &[f64]| c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut best = (f64::INFINITY, 0);
    for (i, c) in centroids.iter().enumerate() {
        let dd = dist(c);
        if dd < best.0 {
            best = (dd, i);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_data() {
        let spec =
            SynthSpec { generator: Generator::PlLinear { weight_scale: 1.0 }, instances: 200, labels: 5, dims: 3 };
        assert_eq!(synth(&spec, 4).unwrap(), synth(&spec, 4).unwrap());
        assert_ne!(synth(&spec, 4).unwrap(), synth(&spec, 5).unwrap());
    }

    #[test]
    fn capped_theta_reproduces_region_centers() {
        let spec = SynthSpec {
            generator: Generator::MallowsRegions { regions: 3, theta: THETA_MAX },
            instances: 200,
            labels: 5,
            dims: 2,
        };
        let data = synth(&spec, 17).unwrap();
        // Re-derive centroids and centers from the same stream.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let centroids: Vec<Vec<f64>> = (0..3).map(|_| normal_vec(2, 1.0, &mut rng)).collect();
        let centers: Vec<Ranking> = (0..3).map(|_| Ranking::random(5, &mut rng)).collect();
        for i in 0..data.len() {
            assert_eq!(data.ranking(i), &centers[nearest(&centroids, data.row(i))]);
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec =
            SynthSpec { generator: Generator::PlLinear { weight_scale: -1.0 }, instances: 10, labels: 3, dims: 1 };
        assert!(synth(&spec, 0).is_err());
        spec.generator = Generator::MallowsRegions { regions: 0, theta: 1.0 };
        assert!(synth(&spec, 0).is_err());
        spec.generator = Generator::MallowsRegions { regions: 2, theta: 25.0 };
        assert!(synth(&spec, 0).is_err());
        spec.generator = Generator::PlLinear { weight_scale: 1.0 };
        spec.labels = 1;
        assert!(synth(&spec, 0).is_err());
    }
}
