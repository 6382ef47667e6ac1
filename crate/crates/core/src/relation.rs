//! Strict relations, partial orders and valued (probabilistic) preference
//! relations over `m` labels.

use std::fmt;

use crate::error::{Error, Result};
use crate::perm::Ranking;

/// Tolerance on `P[i][j] + P[j][i] = 1` for model-derived relations.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-12;

/// Irreflexive, asymmetric binary relation. `has_edge(i, j)` means label `i`
/// is asserted to be preferred to label `j`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StrictRelation {
    m: usize,
    edges: Vec<bool>,
}

impl StrictRelation {
    pub fn empty(m: usize) -> Self {
        StrictRelation { m, edges: vec![false; m * m] }
    }

    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut rel = StrictRelation::empty(m);
        for &(i, j) in edges {
            rel.insert(i, j)?;
        }
        Ok(rel)
    }

    /// Builds the relation `{(i, j) : pred(i, j)}` and validates it.
    pub fn from_fn(m: usize, mut pred: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut rel = StrictRelation::empty(m);
        for i in 0..m {
            for j in 0..m {
                if i != j && pred(i, j) {
                    rel.insert(i, j)?;
                }
            }
        }
        Ok(rel)
    }

    /// The total order encoded by a ranking.
    pub fn from_ranking(ranking: &Ranking) -> Self {
        let m = ranking.len();
        let mut rel = StrictRelation::empty(m);
        for a in 0..m {
            for b in (a + 1)..m {
                rel.edges[ranking.label_at(a) * m + ranking.label_at(b)] = true;
            }
        }
        rel
    }

    pub fn insert(&mut self, i: usize, j: usize) -> Result<()> {
        for idx in [i, j] {
            if idx >= self.m {
                return Err(Error::LabelOutOfRange { index: idx, labels: self.m });
            }
        }
        if i == j {
            return Err(Error::NotStrict(format!("reflexive edge on label {i}")));
        }
        if self.edges[j * self.m + i] {
            return Err(Error::NotStrict(format!("both {i}>{j} and {j}>{i}")));
        }
        self.edges[i * self.m + j] = true;
        Ok(())
    }

    pub fn labels(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges[i * self.m + j]
    }

    /// Asserted pairs in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        self.edges.iter().enumerate().filter(|(_, &e)| e).map(move |(idx, _)| (idx / m, idx % m))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// True if `self`'s edges are a subset of `other`'s.
    pub fn is_subset_of(&self, other: &StrictRelation) -> bool {
        self.m == other.m && self.edges.iter().zip(&other.edges).all(|(&a, &b)| !a || b)
    }

    /// Depth-first search for a directed cycle.
    pub fn has_cycle(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let m = self.m;
        let mut mark = vec![Mark::New; m];
        // Explicit stack of (node, next successor to inspect).
        let mut stack: Vec<(usize, usize)> = Vec::with_capacity(m);
        for root in 0..m {
            if mark[root] != Mark::New {
                continue;
            }
            mark[root] = Mark::Active;
            stack.push((root, 0));
            while let Some(top) = stack.last_mut() {
                let (node, next) = *top;
                if next == m {
                    mark[node] = Mark::Done;
                    stack.pop();
                    continue;
                }
                top.1 += 1;
                if !self.has_edge(node, next) {
                    continue;
                }
                match mark[next] {
                    Mark::Active => return true,
                    Mark::New => {
                        mark[next] = Mark::Active;
                        stack.push((next, 0));
                    }
                    Mark::Done => {}
                }
            }
        }
        false
    }

    pub fn is_transitive(&self) -> bool {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                if !self.has_edge(i, j) {
                    continue;
                }
                for k in 0..m {
                    if self.has_edge(j, k) && !self.has_edge(i, k) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Smallest transitive superset, via Floyd-Warshall reachability in O(m^3).
    pub fn transitive_closure(&self) -> Result<PartialOrder> {
        if self.has_cycle() {
            return Err(Error::Cyclic);
        }
        let m = self.m;
        let mut reach = self.edges.clone();
        for k in 0..m {
            for i in 0..m {
                if !reach[i * m + k] {
                    continue;
                }
                for j in 0..m {
                    if reach[k * m + j] {
                        reach[i * m + j] = true;
                    }
                }
            }
        }
        PartialOrder::try_from(StrictRelation { m, edges: reach })
    }
}

impl fmt::Debug for StrictRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.edges().map(|(i, j)| format!("{i}>{j}"))).finish()
    }
}

/// A strict relation that is also transitive (hence acyclic).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialOrder(StrictRelation);

impl PartialOrder {
    pub fn empty(m: usize) -> Self {
        PartialOrder(StrictRelation::empty(m))
    }

    pub fn from_ranking(ranking: &Ranking) -> Self {
        PartialOrder(StrictRelation::from_ranking(ranking))
    }

    pub fn relation(&self) -> &StrictRelation {
        &self.0
    }

    pub fn into_relation(self) -> StrictRelation {
        self.0
    }

    pub fn labels(&self) -> usize {
        self.0.m
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.0.has_edge(i, j)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.edges()
    }

    /// True if `i` and `j` are ordered either way.
    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.0.has_edge(i, j) || self.0.has_edge(j, i)
    }

    /// Number of unordered label pairs on which an order is asserted.
    pub fn comparable_pairs(&self) -> usize {
        self.0.edge_count()
    }

    /// Re-runs every partial order check on the underlying relation.
    pub fn validate(&self) -> Result<()> {
        validate_partial_order(&self.0)
    }
}

fn validate_partial_order(rel: &StrictRelation) -> Result<()> {
    for i in 0..rel.m {
        if rel.has_edge(i, i) {
            return Err(Error::NotStrict(format!("reflexive edge on label {i}")));
        }
        for j in (i + 1)..rel.m {
            if rel.has_edge(i, j) && rel.has_edge(j, i) {
                return Err(Error::NotStrict(format!("both {i}>{j} and {j}>{i}")));
            }
        }
    }
    if !rel.is_transitive() {
        return Err(Error::NotTransitive);
    }
    if rel.has_cycle() {
        return Err(Error::Cyclic);
    }
    Ok(())
}

impl TryFrom<StrictRelation> for PartialOrder {
    type Error = Error;

    fn try_from(rel: StrictRelation) -> Result<Self> {
        validate_partial_order(&rel)?;
        Ok(PartialOrder(rel))
    }
}

impl fmt::Debug for PartialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialOrder{:?}", self.0)
    }
}

/// Reciprocal matrix of pairwise preference probabilities. The diagonal is
/// fixed at 0.5 and never consulted.
#[derive(Clone, PartialEq)]
pub struct ValuedPreferenceRelation {
    m: usize,
    p: Vec<f64>,
}

impl ValuedPreferenceRelation {
    /// Builds `P[i][j] = f(i, j)` for `i < j` and fills the lower triangle by
    /// reciprocity, so the result is reciprocal up to rounding of `1 - x`.
    pub fn from_upper(m: usize, mut f: impl FnMut(usize, usize) -> Result<f64>) -> Result<Self> {
        let mut p = vec![0.5; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let v = f(i, j)?;
                check_probability(v, i, j)?;
                p[i * m + j] = v;
                p[j * m + i] = 1.0 - v;
            }
        }
        Ok(ValuedPreferenceRelation { m, p })
    }

    /// Builds a relation from a full row-major `m x m` matrix, checking
    /// reciprocity within [`RECIPROCITY_TOLERANCE`].
    pub fn from_matrix(m: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, found: matrix.len() });
        }
        let mut p = matrix;
        for i in 0..m {
            p[i * m + i] = 0.5;
            for j in (i + 1)..m {
                let (a, b) = (p[i * m + j], p[j * m + i]);
                check_probability(a, i, j)?;
                check_probability(b, j, i)?;
                if (a + b - 1.0).abs() > RECIPROCITY_TOLERANCE {
                    return Err(Error::InvalidRelation(format!("P[{i}][{j}] + P[{j}][{i}] = {} is not 1", a + b)));
                }
            }
        }
        Ok(ValuedPreferenceRelation { m, p })
    }

    pub fn labels(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.m + j]
    }

    /// Off-diagonal entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.m;
        self.p.iter().enumerate().filter(move |(idx, _)| idx / m != idx % m).map(move |(idx, &v)| (idx / m, idx % m, v))
    }

    pub fn max_reciprocity_error(&self) -> f64 {
        self.off_diagonal().map(|(i, j, v)| (v + self.get(j, i) - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn check_probability(v: f64, i: usize, j: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidRelation(format!("P[{i}][{j}] = {v} is not a probability")));
    }
    Ok(())
}

impl fmt::Debug for ValuedPreferenceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.p.chunks(self.m.max(1)).collect();
        f.debug_struct("ValuedPreferenceRelation").field("p", &rows).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(m: usize, edges: &[(usize, usize)]) -> StrictRelation {
        StrictRelation::from_edges(m, edges).unwrap()
    }

    #[test]
    fn strictness_enforced() {
        assert!(StrictRelation::from_edges(3, &[(1, 1)]).is_err());
        assert!(StrictRelation::from_edges(3, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn cycle_detection() {
        assert!(!rel(3, &[(0, 1), (1, 2)]).has_cycle());
        assert!(rel(3, &[(0, 1), (1, 2), (2, 0)]).has_cycle());
        assert!(!StrictRelation::empty(3).has_cycle());
        assert!(rel(5, &[(3, 4), (0, 1), (1, 2), (2, 3), (4, 1)]).has_cycle());
    }

    #[test]
    fn transitivity() {
        assert!(rel(3, &[(0, 1), (1, 2), (0, 2)]).is_transitive());
        assert!(!rel(3, &[(0, 1), (1, 2)]).is_transitive());
        assert!(StrictRelation::empty(3).is_transitive());
    }

    #[test]
    fn closure_examples() {
        let closed = rel(3, &[(0, 1), (1, 2)]).transitive_closure().unwrap();
        assert_eq!(closed.relation(), &rel(3, &[(0, 1), (1, 2), (0, 2)]));

        let already = rel(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(already.transitive_closure().unwrap().relation(), &already);

        let chain = rel(4, &[(0, 1), (1, 2), (2, 3)]).transitive_closure().unwrap();
        assert_eq!(chain.comparable_pairs(), 6);

        assert_eq!(rel(3, &[(0, 1), (1, 2), (2, 0)]).transitive_closure(), Err(Error::Cyclic));
    }

    #[test]
    fn partial_order_validation() {
        assert_eq!(PartialOrder::try_from(rel(3, &[(0, 1), (1, 2)])), Err(Error::NotTransitive));
        let total = PartialOrder::from_ranking(&Ranking::new(vec![2, 0, 1]).unwrap());
        assert!(total.validate().is_ok());
        assert!(total.has_edge(2, 1) && total.has_edge(0, 1) && total.has_edge(2, 0));
    }

    #[test]
    fn valued_relation_reciprocity() {
        let ok = ValuedPreferenceRelation::from_matrix(2, vec![0.5, 0.7, 0.3, 0.5]).unwrap();
        assert_eq!(ok.get(0, 1), 0.7);
        assert!(ValuedPreferenceRelation::from_matrix(2, vec![0.5, 0.7, 0.4, 0.5]).is_err());
        assert!(ValuedPreferenceRelation::from_matrix(2, vec![0.5, 1.2, -0.2, 0.5]).is_err());
    }
}
