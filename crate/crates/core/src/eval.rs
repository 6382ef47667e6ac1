//! Correctness / completeness metrics and the threshold sweep harness.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abstention::{predict_baseline, predict_from_model_relation, AbstentionPrediction, Threshold};
use crate::error::{Error, Result};
use crate::learners::{Dataset, EnsembleRanker, LearnerConfig, ModelKind, ProbabilisticRanker};
use crate::parallel;
use crate::perm::Ranking;
use crate::relation::{PartialOrder, ValuedPreferenceRelation};

/// Goodman-Kruskal gamma between a true ranking and a predicted partial
/// order, over the pairs the prediction orders. `None` when it orders none.
pub fn gamma_correctness(truth: &Ranking, pred: &PartialOrder) -> Result<Option<f64>> {
    if truth.len() != pred.labels() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: pred.labels() });
    }
    let (mut concordant, mut discordant) = (0usize, 0usize);
    for (i, j) in pred.edges() {
        if truth.prefers(i, j) {
            concordant += 1;
        } else {
            discordant += 1;
        }
    }
    let asserted = concordant + discordant;
    Ok((asserted > 0).then(|| (concordant as f64 - discordant as f64) / asserted as f64))
}

/// Fraction of unordered label pairs on which `pred` commits to an order.
pub fn completeness(pred: &PartialOrder) -> f64 {
    let m = pred.labels();
    if m < 2 {
        return 1.0;
    }
    pred.comparable_pairs() as f64 / (m * (m - 1) / 2) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mallows,
    PlackettLuce,
    Baseline,
}

impl Method {
    /// Identifier written to curve files.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Mallows => "probabilistic-mallows",
            Method::PlackettLuce => "probabilistic-pl",
            Method::Baseline => "baseline-ensemble",
        }
    }

    pub fn model_kind(self) -> Option<ModelKind> {
        match self {
            Method::Mallows => Some(ModelKind::Mallows),
            Method::PlackettLuce => Some(ModelKind::PlackettLuce),
            Method::Baseline => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mallows" | "probabilistic-mallows" => Ok(Method::Mallows),
            "pl" | "probabilistic-pl" => Ok(Method::PlackettLuce),
            "baseline" | "baseline-ensemble" => Ok(Method::Baseline),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// Strictly increasing thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid(Vec<Threshold>);

impl QGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("empty threshold grid".into()));
        }
        let grid = values.into_iter().map(Threshold::new).collect::<Result<Vec<_>>>()?;
        if grid.windows(2).any(|w| w[1].value() <= w[0].value()) {
            return Err(Error::InvalidConfig("threshold grid must be strictly increasing".into()));
        }
        Ok(QGrid(grid))
    }

    /// `lo`, `lo + step`, ... up to and including `hi` (within rounding).
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let finite = lo.is_finite() && hi.is_finite() && step.is_finite();
        if !finite || step <= 0.0 || hi < lo {
            return Err(Error::InvalidConfig(format!("bad grid {lo}:{hi}:{step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        // Round to 12 decimals so 0.5 + 9 * 0.05 prints as 0.95.
        let values = (0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect();
        QGrid::new(values)
    }

    pub fn thresholds(&self) -> &[Threshold] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for QGrid {
    fn default() -> Self {
        QGrid::range(0.5, 0.95, 0.05).expect("static grid")
    }
}

impl FromStr for QGrid {
    type Err = Error;

    /// Parses `lo:hi:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(Error::InvalidConfig(format!("expected lo:hi:step, got {s:?}")));
        };
        let num =
            |t: &str| t.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad number {t:?} in grid")));
        QGrid::range(num(lo)?, num(hi)?, num(step)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub q: Threshold,
    pub completeness: f64,
    pub correctness: Option<f64>,
    /// Instances (or folds, for cross-fold means) with a defined correctness.
    pub n_evaluated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub method: Method,
    pub points: Vec<TradeoffPoint>,
}

impl TradeoffCurve {
    pub fn point(&self, q: f64) -> Option<&TradeoffPoint> {
        self.points.iter().find(|p| (p.q.value() - q).abs() < 1e-9)
    }
}

/// Metrics of one test instance at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceScore {
    pub completeness: f64,
    pub correctness: Option<f64>,
}

/// Predicts partial orders for a trained method.
#[derive(Debug, Clone)]
pub enum Predictor {
    Probabilistic(ProbabilisticRanker),
    Baseline(EnsembleRanker),
}

impl Predictor {
    pub fn fit(train: &Dataset, method: Method, cfg: &LearnerConfig) -> Result<Self> {
        Ok(match method.model_kind() {
            Some(kind) => {
                let cfg = LearnerConfig { model_kind: kind, ..*cfg };
                Predictor::Probabilistic(ProbabilisticRanker::fit(train, &cfg)?)
            }
            None => Predictor::Baseline(EnsembleRanker::fit(train, cfg)?),
        })
    }

    /// Valued relation the thresholds are applied to.
    pub fn relation(&self, x: &[f64]) -> Result<ValuedPreferenceRelation> {
        match self {
            Predictor::Probabilistic(ranker) => ranker.predict_model(x)?.preference_relation(),
            Predictor::Baseline(ensemble) => ensemble.relation(x),
        }
    }

    pub fn predict_from_relation(&self, p: &ValuedPreferenceRelation, q: Threshold) -> Result<AbstentionPrediction> {
        match self {
            Predictor::Probabilistic(_) => predict_from_model_relation(p, q),
            Predictor::Baseline(_) => predict_baseline(p, q),
        }
    }

    pub fn predict(&self, x: &[f64], q: Threshold) -> Result<AbstentionPrediction> {
        self.predict_from_relation(&self.relation(x)?, q)
    }
}

/// Scores for every test instance (outer) at every threshold (inner).
pub fn score_instances(
    train: &Dataset,
    test: &Dataset,
    method: Method,
    cfg: &LearnerConfig,
    grid: &QGrid,
) -> Result<Vec<Vec<InstanceScore>>> {
    if train.labels() != test.labels() {
        return Err(Error::DimensionMismatch { expected: train.labels(), found: test.labels() });
    }
    let predictor = Predictor::fit(train, method, cfg)?;
    parallel::map_range(test.len(), |t| {
        let p = predictor.relation(test.row(t))?;
        grid.thresholds()
            .iter()
            .map(|&q| {
                let pred = predictor.predict_from_relation(&p, q)?;
                Ok(InstanceScore {
                    completeness: completeness(&pred.order),
                    correctness: gamma_correctness(test.ranking(t), &pred.order)?,
                })
            })
            .collect()
    })
    .into_iter()
    .collect()
}

/// Averages per-instance scores. Undefined correctness is skipped and
/// surfaced through `n_evaluated`.
pub fn aggregate(method: Method, grid: &QGrid, scores: &[Vec<InstanceScore>]) -> TradeoffCurve {
    let points = grid
        .thresholds()
        .iter()
        .enumerate()
        .map(|(g, &q)| {
            let comp = scores.iter().map(|s| s[g].completeness).sum::<f64>() / scores.len().max(1) as f64;
            let defined: Vec<f64> = scores.iter().filter_map(|s| s[g].correctness).collect();
            TradeoffPoint { q, completeness: comp, correctness: mean(&defined), n_evaluated: defined.len() }
        })
        .collect();
    TradeoffCurve { method, points }
}

pub fn sweep(
    train: &Dataset,
    test: &Dataset,
    method: Method,
    cfg: &LearnerConfig,
    grid: &QGrid,
) -> Result<TradeoffCurve> {
    Ok(aggregate(method, grid, &score_instances(train, test, method, cfg, grid)?))
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mu = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// Seeded fold of every row: a shuffled index order dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (slot, &row) in order.iter().enumerate() {
        assignment[row] = slot % folds;
    }
    assignment
}

/// Learner seed for fold `fold`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add((fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    /// Pointwise mean over folds; `n_evaluated` counts folds with a defined correctness.
    pub mean: TradeoffCurve,
    /// Pointwise sample standard deviation of (completeness, correctness) over folds.
    pub std_dev: Vec<(Option<f64>, Option<f64>)>,
    pub folds: Vec<TradeoffCurve>,
    pub instances: Vec<FoldInstances>,
}

/// Per-instance scores of one fold, for distributional analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldInstances {
    /// Dataset rows held out in this fold, in evaluation order.
    pub rows: Vec<usize>,
    /// `scores[t][g]`: row `rows[t]` at the `g`-th threshold.
    pub scores: Vec<Vec<InstanceScore>>,
}

pub fn cross_validate(
    data: &Dataset,
    folds: usize,
    method: Method,
    cfg: &LearnerConfig,
    grid: &QGrid,
) -> Result<CrossValidation> {
    if folds < 2 || folds > data.len() {
        return Err(Error::InvalidConfig(format!("{folds} folds for {} instances", data.len())));
    }
    cross_validate_with(data, &fold_assignment(data.len(), folds, cfg.seed), method, cfg, grid)
}

/// Cross-validation over an explicit row-to-fold assignment.
pub fn cross_validate_with(
    data: &Dataset,
    assignment: &[usize],
    method: Method,
    cfg: &LearnerConfig,
    grid: &QGrid,
) -> Result<CrossValidation> {
    if assignment.len() != data.len() {
        return Err(Error::DimensionMismatch { expected: data.len(), found: assignment.len() });
    }
    let folds = assignment.iter().max().map_or(0, |f| f + 1);
    let split: Vec<(Vec<usize>, Vec<usize>)> =
        (0..folds).map(|f| (0..data.len()).partition(|&i| assignment[i] != f)).collect();
    for (f, (train, test)) in split.iter().enumerate() {
        if test.is_empty() || train.len() < cfg.k {
            return Err(Error::InvalidConfig(format!(
                "fold {f} has {} test and {} training rows (k = {})",
                test.len(),
                train.len(),
                cfg.k
            )));
        }
    }
    let instances = parallel::map(&split, |(train, test)| {
        let f = assignment[test[0]];
        let fold_cfg = LearnerConfig { seed: fold_seed(cfg.seed, f), ..*cfg };
        let scores = score_instances(&data.select(train), &data.select(test), method, &fold_cfg, grid)?;
        Ok(FoldInstances { rows: test.clone(), scores })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let curves: Vec<TradeoffCurve> = instances.iter().map(|fold| aggregate(method, grid, &fold.scores)).collect();

    let mut points = Vec::with_capacity(grid.len());
    let mut std_dev = Vec::with_capacity(grid.len());
    for (g, &q) in grid.thresholds().iter().enumerate() {
        let comp: Vec<f64> = curves.iter().map(|c| c.points[g].completeness).collect();
        let corr: Vec<f64> = curves.iter().filter_map(|c| c.points[g].correctness).collect();
        points.push(TradeoffPoint {
            q,
            completeness: mean(&comp).unwrap_or(0.0),
            correctness: mean(&corr),
            n_evaluated: corr.len(),
        });
        std_dev.push((sample_sd(&comp), sample_sd(&corr)));
    }
    Ok(CrossValidation { mean: TradeoffCurve { method, points }, std_dev, folds: curves, instances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::StrictRelation;

    fn r(order: &[usize]) -> Ranking {
        Ranking::new(order.to_vec()).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let truth = r(&[2, 0, 3, 1]);
        let total = PartialOrder::from_ranking(&truth);
        assert_eq!(gamma_correctness(&truth, &total).unwrap(), Some(1.0));
        let reversed = PartialOrder::from_ranking(&truth.reversed());
        assert_eq!(gamma_correctness(&truth, &reversed).unwrap(), Some(-1.0));
        let mixed = PartialOrder::try_from(StrictRelation::from_edges(4, &[(2, 0), (1, 3)]).unwrap()).unwrap();
        assert_eq!(gamma_correctness(&truth, &mixed).unwrap(), Some(0.0));
        assert_eq!(gamma_correctness(&truth, &PartialOrder::empty(4)).unwrap(), None);
        assert!(gamma_correctness(&r(&[0, 1]), &PartialOrder::empty(3)).is_err());
    }

    #[test]
    fn completeness_examples() {
        assert_eq!(completeness(&PartialOrder::from_ranking(&r(&[1, 0, 2]))), 1.0);
        assert_eq!(completeness(&PartialOrder::empty(3)), 0.0);
        let half = PartialOrder::try_from(StrictRelation::from_edges(4, &[(0, 1), (1, 2), (0, 2)]).unwrap()).unwrap();
        assert_eq!(completeness(&half), 0.5);
    }

    #[test]
    fn grid_parsing() {
        let default = QGrid::default();
        assert_eq!(default.len(), 10);
        assert_eq!(default.thresholds()[9].value(), 0.95);
        assert_eq!("0.5:0.9:0.1".parse::<QGrid>().unwrap().len(), 5);
        assert!("0.5:1.0:0.1".parse::<QGrid>().is_err());
        assert!("0.5:0.9".parse::<QGrid>().is_err());
        assert!("0.4:0.9:0.1".parse::<QGrid>().is_err());
        assert!(QGrid::new(vec![0.6, 0.6]).is_err());
    }

    #[test]
    fn fold_assignment_is_balanced_and_seeded() {
        let a = fold_assignment(23, 5, 9);
        assert_eq!(a, fold_assignment(23, 5, 9));
        for f in 0..5 {
            let size = a.iter().filter(|&&x| x == f).count();
            assert!(size == 4 || size == 5);
        }
    }

    #[test]
    fn method_names() {
        for m in [Method::Mallows, Method::PlackettLuce, Method::Baseline] {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert_eq!("pl".parse::<Method>().unwrap(), Method::PlackettLuce);
        assert!("svm".parse::<Method>().is_err());
    }
}
