//! Rankings (permutations of label indices), Kendall distance and exhaustive
//! enumeration of the symmetric group.
//!
//! Labels are 0-based indices `0..m`. A [`Ranking`] stores both the order
//! (`order[pos]` is the label at position `pos`) and its inverse
//! (`position_of(label)`).

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest label count for which exact enumeration over all rankings is allowed.
pub const ENUMERATION_CAP: usize = 9;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<usize>,
    positions: Vec<usize>,
}

impl Ranking {
    /// Builds a ranking from a label order, rejecting anything that is not a
    /// permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        if m == 0 {
            return Err(Error::InvalidRanking("empty ranking".into()));
        }
        let mut positions = vec![usize::MAX; m];
        for (pos, &label) in order.iter().enumerate() {
            if label >= m {
                return Err(Error::LabelOutOfRange { index: label, labels: m });
            }
            if positions[label] != usize::MAX {
                return Err(Error::InvalidRanking(format!("label {label} appears twice")));
            }
            positions[label] = pos;
        }
        Ok(Ranking { order, positions })
    }

    pub fn identity(m: usize) -> Self {
        let order: Vec<usize> = (0..m).collect();
        Ranking { positions: order.clone(), order }
    }

    /// Builds a ranking from the position of every label.
    pub fn from_positions(positions: Vec<usize>) -> Result<Self> {
        let inverse = Ranking::new(positions)?;
        Ok(Ranking { order: inverse.positions, positions: inverse.order })
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        Ranking::new(order).expect("shuffle preserves bijection")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn label_at(&self, pos: usize) -> usize {
        self.order[pos]
    }

    pub fn position_of(&self, label: usize) -> usize {
        self.positions[label]
    }

    /// True if `a` is ranked ahead of `b`.
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.positions[a] < self.positions[b]
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Ranking::new(order).expect("reversal preserves bijection")
    }

    /// Swaps the positions of labels `a` and `b`.
    pub fn transposed(&self, a: usize, b: usize) -> Self {
        let mut order = self.order.clone();
        order.swap(self.positions[a], self.positions[b]);
        Ranking::new(order).expect("transposition preserves bijection")
    }

    /// Relabels every label `l` as `relabel.order()[l]`.
    ///
    /// Applying the same relabeling to two rankings leaves their Kendall
    /// distance unchanged.
    pub fn relabeled(&self, relabel: &Ranking) -> Result<Self> {
        check_same_len(self, relabel)?;
        Ranking::new(self.order.iter().map(|&l| relabel.order[l]).collect())
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ranking{:?}", self.order)
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, label) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            write!(f, "{label}")?;
        }
        Ok(())
    }
}

fn check_same_len(a: &Ranking, b: &Ranking) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(())
}

/// Number of label pairs ordered differently by `a` and `b`.
pub fn kendall_distance(a: &Ranking, b: &Ranking) -> Result<usize> {
    check_same_len(a, b)?;
    Ok(kendall_unchecked(a, b))
}

pub(crate) fn kendall_unchecked(a: &Ranking, b: &Ranking) -> usize {
    // Walk labels in a's order; count inversions of their positions in b.
    let seq: Vec<usize> = a.order.iter().map(|&l| b.positions[l]).collect();
    inversions(&seq)
}

/// Inversion count of a sequence of distinct values.
pub(crate) fn inversions(seq: &[usize]) -> usize {
    let mut count = 0;
    for (i, &x) in seq.iter().enumerate() {
        count += seq[i + 1..].iter().filter(|&&y| y < x).count();
    }
    count
}

/// Largest possible Kendall distance between rankings of `m` labels.
pub fn max_kendall(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Lexicographic stream of all `m!` rankings of `m` labels.
#[derive(Debug, Clone)]
pub struct Rankings {
    next: Option<Vec<usize>>,
}

impl Iterator for Rankings {
    type Item = Ranking;

    fn next(&mut self) -> Option<Ranking> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Ranking::new(current).expect("permutation"))
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Enumerates every ranking of `m` labels in lexicographic order.
pub fn enumerate_rankings(m: usize) -> Result<Rankings> {
    if m == 0 {
        return Err(Error::InvalidRanking("cannot enumerate rankings of zero labels".into()));
    }
    if m > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { labels: m, cap: ENUMERATION_CAP });
    }
    Ok(Rankings { next: Some((0..m).collect()) })
}

pub fn factorial(m: usize) -> u64 {
    (1..=m as u64).product()
}

/// Monte-Carlo check of the transposition property for a distance.
///
/// Draws triples `(pi, pi2, (a, b))` where `a` precedes `b` in both rankings,
/// builds `pi3` by swapping `a` and `b` in `pi2`, and requires
/// `distance(pi, pi2) <= distance(pi, pi3)` on every draw.
pub fn check_transposition_property<D, T>(distance: D, samples: usize, m: usize, seed: u64) -> bool
where
    D: Fn(&Ranking, &Ranking) -> T,
    T: PartialOrd,
{
    assert!(m >= 2, "transposition check needs at least two labels");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agreeing = Vec::with_capacity(max_kendall(m));
    for _ in 0..samples {
        let pi = Ranking::random(m, &mut rng);
        let (pi2, pair) = loop {
            let candidate = Ranking::random(m, &mut rng);
            agreeing.clear();
            for a in 0..m {
                for b in 0..m {
                    if a != b && pi.prefers(a, b) && candidate.prefers(a, b) {
                        agreeing.push((a, b));
                    }
                }
            }
            // Only the exact reversal of pi has no agreeing pair.
            if !agreeing.is_empty() {
                break (candidate, agreeing[rng.random_range(0..agreeing.len())]);
            }
        };
        let pi3 = pi2.transposed(pair.0, pair.1);
        if distance(&pi, &pi2) > distance(&pi, &pi3) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn r(order: &[usize]) -> Ranking {
        Ranking::new(order.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Ranking::new(vec![0, 0, 1]).is_err());
        assert!(Ranking::new(vec![0, 3, 1]).is_err());
        assert!(Ranking::new(vec![]).is_err());
    }

    #[test]
    fn inverse_is_consistent() {
        let a = r(&[2, 0, 3, 1]);
        for pos in 0..4 {
            assert_eq!(a.position_of(a.label_at(pos)), pos);
        }
        assert_eq!(Ranking::from_positions(a.positions().to_vec()).unwrap(), a);
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_distance(&r(&[0, 1, 2]), &r(&[0, 1, 2])).unwrap(), 0);
        assert_eq!(kendall_distance(&r(&[0, 1, 2]), &r(&[2, 1, 0])).unwrap(), 3);
        assert_eq!(kendall_distance(&r(&[0, 1, 2]), &r(&[1, 0, 2])).unwrap(), 1);
        assert!(matches!(kendall_distance(&r(&[0, 1]), &r(&[0, 1, 2])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_rankings(1).unwrap().collect::<Vec<_>>(), vec![r(&[0])]);
        for m in 2..=7 {
            let all: HashSet<Ranking> = enumerate_rankings(m).unwrap().collect();
            assert_eq!(all.len() as u64, factorial(m));
        }
        assert!(matches!(enumerate_rankings(10), Err(Error::EnumerationCap { .. })));
    }

    #[test]
    fn transposition_property() {
        let kendall = |a: &Ranking, b: &Ranking| kendall_unchecked(a, b) as i64;
        assert!(check_transposition_property(kendall, 1000, 4, 7));
        assert!(!check_transposition_property(|a, b| -kendall(a, b), 1000, 4, 7));
        // Smallest witness, written out.
        let pi = r(&[0, 1]);
        assert!(kendall(&pi, &pi) <= kendall(&pi, &pi.transposed(0, 1)));
    }
}
