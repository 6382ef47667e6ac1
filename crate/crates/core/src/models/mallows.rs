//! Mallows model under Kendall distance.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FitReport;
use crate::error::{Error, Result};
use crate::perm::{self, Ranking, ENUMERATION_CAP};
use crate::relation::ValuedPreferenceRelation;

/// Upper bound on the spread parameter. At ten labels or fewer the model is
/// numerically a point mass on the center at this value.
pub const THETA_MAX: f64 = 20.0;

const BISECTION_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct MallowsModel {
    center: Ranking,
    theta: f64,
}

impl MallowsModel {
    pub fn new(center: Ranking, theta: f64) -> Result<Self> {
        if !(0.0..=THETA_MAX).contains(&theta) {
            return Err(Error::InvalidModel(format!("theta {theta} outside [0, {THETA_MAX}]")));
        }
        Ok(MallowsModel { center, theta })
    }

    pub fn center(&self) -> &Ranking {
        &self.center
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn labels(&self) -> usize {
        self.center.len()
    }

    pub fn log_pdf(&self, pi: &Ranking) -> Result<f64> {
        let d = perm::kendall_distance(pi, &self.center)?;
        Ok(-self.theta * d as f64 - log_normalizer(self.theta, self.labels()))
    }

    /// `P(a > b)` from the cached per-gap marginals.
    pub fn pairwise_marginal(&self, a: usize, b: usize) -> Result<f64> {
        super::check_pair(self.labels(), a, b)?;
        let gaps = self.gap_marginals()?;
        Ok(marginal_from_gaps(&gaps, &self.center, a, b))
    }

    /// Marginal `P(label at center position p precedes label at position p + g)`
    /// indexed by `g` (entry 0 is unused and set to 0.5).
    ///
    /// Kendall distance is right-invariant, so this depends only on the gap,
    /// not on `p`.
    pub fn gap_marginals(&self) -> Result<Vec<f64>> {
        let table = gap_table(self.labels())?;
        // Weights relative to the mode keep exp() in range for large theta.
        let weights: Vec<f64> = (0..table.total.len()).map(|d| (-self.theta * d as f64).exp()).collect();
        let z: f64 = table.total.iter().zip(&weights).map(|(c, w)| c * w).sum();
        let mut gaps = vec![0.5; self.labels()];
        for (g, counts) in table.ahead.iter().enumerate().skip(1) {
            let num: f64 = counts.iter().zip(&weights).map(|(c, w)| c * w).sum();
            gaps[g] = num / z;
        }
        Ok(gaps)
    }

    pub fn preference_relation(&self) -> Result<ValuedPreferenceRelation> {
        let gaps = self.gap_marginals()?;
        ValuedPreferenceRelation::from_upper(self.labels(), |a, b| Ok(marginal_from_gaps(&gaps, &self.center, a, b)))
    }

    /// Repeated-insertion sampler. Labels are inserted in center order; the
    /// `j`-th insertion creates `v` new inversions with probability
    /// proportional to `exp(-theta * v)`, `v` in `0..j`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        let m = self.labels();
        let mut order: Vec<usize> = Vec::with_capacity(m);
        let mut weights: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            weights.clear();
            weights.extend((0..=j).map(|v| (-self.theta * v as f64).exp()));
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut inversions = j;
            for (v, w) in weights.iter().enumerate() {
                if u < *w {
                    inversions = v;
                    break;
                }
                u -= w;
            }
            order.insert(j - inversions, self.center.label_at(j));
        }
        Ranking::new(order).expect("insertion builds a permutation")
    }

    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<Ranking> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }

    /// Fits the center by Borda count and the spread by matching the mean
    /// observed distance to the model's expected distance.
    pub fn fit(rankings: &[Ranking]) -> Result<(MallowsModel, FitReport)> {
        let m = super::common_label_count(rankings)?;
        let center = borda_center(rankings, m);
        let mean_distance =
            rankings.iter().map(|r| perm::kendall_unchecked(r, &center) as f64).sum::<f64>() / rankings.len() as f64;

        let (theta, iterations, boundary_hit) = solve_theta(mean_distance, m);
        let model = MallowsModel { center, theta };
        let log_likelihood = rankings.iter().map(|r| model.log_pdf(r)).sum::<Result<f64>>()?;
        Ok((model, FitReport { iterations, converged: true, log_likelihood, boundary_hit }))
    }
}

fn marginal_from_gaps(gaps: &[f64], center: &Ranking, a: usize, b: usize) -> f64 {
    let (pa, pb) = (center.position_of(a), center.position_of(b));
    if pa < pb {
        gaps[pb - pa]
    } else {
        1.0 - gaps[pa - pb]
    }
}

/// Solves `expected_distance(theta) = target` on `[0, THETA_MAX]`.
fn solve_theta(target: f64, m: usize) -> (f64, usize, bool) {
    if target >= expected_distance(0.0, m) {
        return (0.0, 0, false);
    }
    if target <= expected_distance(THETA_MAX, m) {
        return (THETA_MAX, 0, true);
    }
    let (mut lo, mut hi) = (0.0, THETA_MAX);
    let mut iterations = 0;
    while iterations < BISECTION_ITERATIONS && hi - lo > 1e-12 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        // Expected distance decreases in theta.
        if expected_distance(mid, m) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), iterations, false)
}

/// Borda center: labels sorted by mean position, ties to the smaller index.
pub fn borda_center(rankings: &[Ranking], m: usize) -> Ranking {
    let mut totals = vec![0usize; m];
    for r in rankings {
        for (label, &pos) in r.positions().iter().enumerate() {
            totals[label] += pos;
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    // Equal counts share the denominator, so integer totals order the means.
    order.sort_by_key(|&l| (totals[l], l));
    Ranking::new(order).expect("sorted labels form a permutation")
}

/// `ln phi(theta)` for Kendall distance:
/// `phi = prod_{j=1..m} (1 - e^{-j theta}) / (1 - e^{-theta})`, and `ln m!` at zero.
pub fn log_normalizer(theta: f64, m: usize) -> f64 {
    if theta == 0.0 {
        return (1..=m).map(|j| (j as f64).ln()).sum();
    }
    let base = (-(-theta).exp_m1()).ln();
    (1..=m).map(|j| (-(-(j as f64) * theta).exp_m1()).ln() - base).sum()
}

/// `E[D] = -d/dtheta ln phi(theta) = sum_j [1/(e^theta - 1) - j/(e^{j theta} - 1)]`.
pub fn expected_distance(theta: f64, m: usize) -> f64 {
    if theta < 1e-9 {
        return (m * m.saturating_sub(1)) as f64 / 4.0;
    }
    let base = 1.0 / theta.exp_m1();
    (1..=m)
        .map(|j| {
            let j = j as f64;
            base - j / (j * theta).exp_m1()
        })
        .sum()
}

/// Per-label-count counts of rankings by Kendall distance to the identity,
/// split by whether the label at position 0 precedes the label at position g.
#[derive(Debug)]
struct GapTable {
    total: Vec<f64>,
    ahead: Vec<Vec<f64>>,
}

fn gap_table(m: usize) -> Result<&'static GapTable> {
    static TABLES: [OnceLock<GapTable>; ENUMERATION_CAP + 1] = [const { OnceLock::new() }; ENUMERATION_CAP + 1];
    if m > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { labels: m, cap: ENUMERATION_CAP });
    }
    Ok(TABLES[m].get_or_init(|| build_gap_table(m)))
}

fn build_gap_table(m: usize) -> GapTable {
    let levels = perm::max_kendall(m) + 1;
    let mut total = vec![0.0; levels];
    let mut ahead = vec![vec![0.0; levels]; m];
    for pi in perm::enumerate_rankings(m).expect("cap checked") {
        let d = perm::inversions(pi.order());
        total[d] += 1.0;
        for (g, row) in ahead.iter_mut().enumerate().skip(1) {
            if pi.prefers(0, g) {
                row[d] += 1.0;
            }
        }
    }
    GapTable { total, ahead }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(order: &[usize]) -> Ranking {
        Ranking::new(order.to_vec()).unwrap()
    }

    #[test]
    fn normalizer_examples() {
        assert!((log_normalizer(0.0, 3) - 6f64.ln()).abs() < 1e-15);
        assert!((log_normalizer(2f64.ln(), 2) - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(log_normalizer(0.0, 1), 0.0);
        assert!(log_normalizer(3.7, 1).abs() < 1e-15);
    }

    #[test]
    fn normalizer_matches_enumeration() {
        for &theta in &[0.0, 1e-7, 0.3, 1.0, 4.0, 19.0] {
            for m in 1..=6 {
                let z: f64 = perm::enumerate_rankings(m)
                    .unwrap()
                    .map(|p| (-theta * perm::inversions(p.order()) as f64).exp())
                    .sum();
                assert!((log_normalizer(theta, m) - z.ln()).abs() < 1e-10, "{theta} {m}");
            }
        }
    }

    #[test]
    fn expected_distance_matches_finite_difference() {
        for &theta in &[1e-3, 0.1, 1.0, 5.0, 15.0] {
            for m in 2..=9 {
                let h = 1e-6;
                let fd = -(log_normalizer(theta + h, m) - log_normalizer(theta - h, m)) / (2.0 * h);
                assert!((expected_distance(theta, m) - fd).abs() < 1e-6, "{theta} {m}");
            }
        }
        assert_eq!(expected_distance(0.0, 5), 5.0);
    }

    #[test]
    fn pdf_examples() {
        let theta = 2f64.ln();
        let model = MallowsModel::new(r(&[0, 1]), theta).unwrap();
        assert!((model.log_pdf(&r(&[0, 1])).unwrap() - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((model.log_pdf(&r(&[1, 0])).unwrap() - (1.0f64 / 3.0).ln()).abs() < 1e-15);

        let uniform = MallowsModel::new(r(&[2, 0, 1]), 0.0).unwrap();
        for pi in perm::enumerate_rankings(3).unwrap() {
            assert!((uniform.log_pdf(&pi).unwrap() - (1.0f64 / 6.0).ln()).abs() < 1e-15);
        }
        let peaked = MallowsModel::new(r(&[2, 0, 1]), 1.3).unwrap();
        assert_eq!(peaked.log_pdf(&r(&[2, 0, 1])).unwrap(), -log_normalizer(1.3, 3));
        assert!(peaked.log_pdf(&r(&[0, 1])).is_err());
    }

    #[test]
    fn rejects_out_of_range_theta() {
        assert!(MallowsModel::new(r(&[0, 1]), -0.1).is_err());
        assert!(MallowsModel::new(r(&[0, 1]), THETA_MAX + 1.0).is_err());
    }

    #[test]
    fn marginal_examples() {
        let uniform = MallowsModel::new(r(&[0, 1, 2, 3]), 0.0).unwrap();
        for (i, j, v) in uniform.preference_relation().unwrap().off_diagonal() {
            assert_eq!(v, 0.5, "{i} {j}");
        }
        let sharp = MallowsModel::new(r(&[0, 1, 2]), 5.0).unwrap();
        assert!(sharp.pairwise_marginal(0, 1).unwrap() > 0.99);
        assert_eq!(sharp.pairwise_marginal(1, 1), Err(Error::SameLabel(1)));
        assert!(MallowsModel::new(Ranking::identity(10), 1.0).unwrap().pairwise_marginal(0, 1).is_err());
    }

    #[test]
    fn insertion_sampler_is_seeded() {
        let model = MallowsModel::new(r(&[3, 1, 0, 2]), 0.8).unwrap();
        assert_eq!(model.sample_n(50, 11), model.sample_n(50, 11));
        assert_ne!(model.sample_n(50, 11), model.sample_n(50, 12));
    }

    #[test]
    fn borda_ties_go_to_smaller_index() {
        let center = borda_center(&[r(&[0, 1, 2]), r(&[1, 0, 2])], 3);
        assert_eq!(center, r(&[0, 1, 2]));
    }

    #[test]
    fn fit_identical_rankings_hits_cap() {
        let data = vec![r(&[2, 0, 1, 3]); 20];
        let (model, report) = MallowsModel::fit(&data).unwrap();
        assert_eq!(model.center(), &data[0]);
        assert_eq!(model.theta(), THETA_MAX);
        assert!(report.boundary_hit);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert_eq!(MallowsModel::fit(&[]), Err(Error::EmptyInput));
        assert!(matches!(MallowsModel::fit(&[r(&[0, 1]), r(&[0, 1, 2])]), Err(Error::DimensionMismatch { .. })));
    }
}
