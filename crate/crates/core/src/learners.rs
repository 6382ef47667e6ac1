//! Instance-based label rankers.
//!
//! The probabilistic learners fit a Mallows or Plackett-Luce model to the
//! rankings of the `k` nearest training instances. The ensemble baseline
//! trains `B` k-NN Borda rankers on bootstrap resamples and reports the
//! fraction of members voting for each pairwise preference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{borda_center, MallowsModel, PlModel, PreferenceModel};
use crate::parallel;
use crate::perm::Ranking;
use crate::relation::ValuedPreferenceRelation;

/// Feature vectors paired with complete rankings over a shared label set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dims: usize,
    rankings: Vec<Ranking>,
    label_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        rankings: Vec<Ranking>,
        label_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let dims = feature_names.len();
        if dims == 0 {
            return Err(Error::InvalidConfig("dataset needs at least one feature".into()));
        }
        if rankings.is_empty() {
            return Err(Error::EmptyInput);
        }
        if features.len() != rankings.len() {
            return Err(Error::DimensionMismatch { expected: rankings.len(), found: features.len() });
        }
        let m = label_names.len();
        let mut flat = Vec::with_capacity(features.len() * dims);
        for (row, (x, r)) in features.into_iter().zip(&rankings).enumerate() {
            if x.len() != dims {
                return Err(Error::DimensionMismatch { expected: dims, found: x.len() });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("row {row}: non-finite feature")));
            }
            if r.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: r.len() });
            }
            flat.extend(x);
        }
        Ok(Dataset { features: flat, dims, rankings, label_names, feature_names })
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dims..(i + 1) * self.dims]
    }

    pub fn ranking(&self, i: usize) -> &Ranking {
        &self.rankings[i]
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Rows `indices` in the given order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            dims: self.dims,
            rankings: indices.iter().map(|&i| self.rankings[i].clone()).collect(),
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Mallows,
    PlackettLuce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnerConfig {
    pub k: usize,
    pub model_kind: ModelKind,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig { k: 10, model_kind: ModelKind::PlackettLuce, ensemble_size: 10, seed: 0 }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.ensemble_size == 0 {
            return Err(Error::InvalidConfig("ensemble size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Euclidean nearest-neighbor index over z-scored features. Ties in distance
/// go to the lower row index.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    mean: Vec<f64>,
    scale: Vec<f64>,
    rows: Vec<f64>,
    rankings: Vec<Ranking>,
}

impl KnnIndex {
    pub fn new(train: &Dataset) -> Self {
        let (n, d) = (train.len(), train.dims());
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, x) in mean.iter_mut().zip(train.row(i)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut scale = vec![0.0; d];
        for i in 0..n {
            for ((s, x), m) in scale.iter_mut().zip(train.row(i)).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        // Constant features carry no information; leave them unscaled.
        for s in scale.iter_mut() {
            *s = (*s / n as f64).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        let mut rows = Vec::with_capacity(n * d);
        for i in 0..n {
            rows.extend(train.row(i).iter().zip(&mean).zip(&scale).map(|((x, m), s)| (x - m) / s));
        }
        KnnIndex { mean, scale, rows, rankings: train.rankings().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    /// Row indices of the `k` nearest instances, nearest first.
    pub fn neighbors(&self, x: &[f64], k: usize) -> Result<Vec<usize>> {
        let d = self.mean.len();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.len() });
        }
        if k == 0 || k > self.len() {
            return Err(Error::InvalidConfig(format!("k = {k} with {} training rows", self.len())));
        }
        let z: Vec<f64> = x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect();
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .chunks_exact(d)
            .map(|row| row.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .zip(0..)
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_distance);
            dist.truncate(k);
        }
        dist.sort_by(by_distance);
        Ok(dist.into_iter().map(|(_, i)| i).collect())
    }

    pub fn neighbor_rankings(&self, x: &[f64], k: usize) -> Result<Vec<Ranking>> {
        Ok(self.neighbors(x, k)?.into_iter().map(|i| self.rankings[i].clone()).collect())
    }
}

/// Rankings of the `k` training instances nearest to `x`.
pub fn knn_neighbors(train: &Dataset, x: &[f64], k: usize) -> Result<Vec<Ranking>> {
    KnnIndex::new(train).neighbor_rankings(x, k)
}

/// Fits `kind` to the given rankings.
pub fn fit_model(kind: ModelKind, rankings: &[Ranking]) -> Result<PreferenceModel> {
    Ok(match kind {
        ModelKind::Mallows => MallowsModel::fit(rankings)?.0.into(),
        ModelKind::PlackettLuce => PlModel::fit(rankings)?.0.into(),
    })
}

/// Fits a local Mallows or Plackett-Luce model around each query point.
#[derive(Debug, Clone)]
pub struct ProbabilisticRanker {
    index: KnnIndex,
    kind: ModelKind,
    k: usize,
}

impl ProbabilisticRanker {
    pub fn fit(train: &Dataset, cfg: &LearnerConfig) -> Result<Self> {
        cfg.validate()?;
        check_k(cfg.k, train.len())?;
        Ok(ProbabilisticRanker { index: KnnIndex::new(train), kind: cfg.model_kind, k: cfg.k })
    }

    pub fn predict_model(&self, x: &[f64]) -> Result<PreferenceModel> {
        fit_model(self.kind, &self.index.neighbor_rankings(x, self.k)?)
    }
}

pub fn predict_model(train: &Dataset, x: &[f64], cfg: &LearnerConfig) -> Result<PreferenceModel> {
    ProbabilisticRanker::fit(train, cfg)?.predict_model(x)
}

/// Bagged k-NN Borda rankers.
#[derive(Debug, Clone)]
pub struct EnsembleRanker {
    members: Vec<KnnIndex>,
    k: usize,
    labels: usize,
}

impl EnsembleRanker {
    /// Member `b` trains on a size-`N` resample with replacement drawn from
    /// a generator seeded with `seed + b`.
    pub fn fit(train: &Dataset, cfg: &LearnerConfig) -> Result<Self> {
        cfg.validate()?;
        check_k(cfg.k, train.len())?;
        let n = train.len();
        let members = parallel::map_range(cfg.ensemble_size, |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(b as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            KnnIndex::new(&train.select(&rows))
        });
        Ok(EnsembleRanker { members, k: cfg.k, labels: train.labels() })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Total orders predicted by every member.
    pub fn member_rankings(&self, x: &[f64]) -> Result<Vec<Ranking>> {
        self.members.iter().map(|member| Ok(borda_center(&member.neighbor_rankings(x, self.k)?, self.labels))).collect()
    }

    /// `P[i][j]` is the fraction of members ranking `i` ahead of `j`.
    pub fn relation(&self, x: &[f64]) -> Result<ValuedPreferenceRelation> {
        let votes = self.member_rankings(x)?;
        let b = votes.len() as f64;
        let m = self.labels;
        let mut p = vec![0.5; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    p[i * m + j] = votes.iter().filter(|r| r.prefers(i, j)).count() as f64 / b;
                }
            }
        }
        ValuedPreferenceRelation::from_matrix(m, p)
    }
}

pub fn ensemble_relation(train: &Dataset, x: &[f64], cfg: &LearnerConfig) -> Result<ValuedPreferenceRelation> {
    EnsembleRanker::fit(train, cfg)?.relation(x)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds {n} training rows")));
    }
    Ok(())
}
