//! Random forest of depth-limited Gini trees over sparse features.
//!
//! Each tree is grown on a bootstrap sample (expressed as per-row weights)
//! and considers `⌊√V⌋` randomly chosen features per node. Features that are
//! constant within a node are never drawn, matching the usual CART behaviour
//! of drawing until enough non-constant candidates are found.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::scalar::Scalar;

use super::linear::check_xy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node<T> {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    /// Class distribution indexed by [`Label::index`].
    Leaf { distribution: [T; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn leaf_distribution(&self, x: &SparseVector<T>) -> [T; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if x.get(*feature) <= *threshold { *left } else { *right };
                }
                Node::Leaf { distribution } => return *distribution,
            }
        }
    }

    /// Majority class of the reached leaf; ties go to UNINFORMATIVE.
    pub fn predict(&self, x: &SparseVector<T>) -> Label {
        let d = self.leaf_distribution(x);
        if d[Label::Informative.index()] > d[Label::Uninformative.index()] {
            Label::Informative
        } else {
            Label::Uninformative
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &[T; 2]> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { distribution } => Some(distribution),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams<T> {
    pub trees: Vec<DecisionTree<T>>,
    pub max_depth: usize,
    pub n_trees: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub informative: usize,
    pub uninformative: usize,
}

impl<T: Scalar> ForestParams<T> {
    pub fn votes(&self, x: &SparseVector<T>) -> VoteTally {
        let informative = self.trees.iter().filter(|t| t.predict(x) == Label::Informative).count();
        VoteTally {
            informative,
            uninformative: self.trees.len() - informative,
        }
    }

    /// Majority vote over trees; ties go to UNINFORMATIVE.
    pub fn predict(&self, x: &SparseVector<T>) -> Label {
        let v = self.votes(x);
        if v.informative > v.uninformative {
            Label::Informative
        } else {
            Label::Uninformative
        }
    }
}

pub fn forest_predict<T: Scalar>(x: &SparseVector<T>, params: &ForestParams<T>) -> Label {
    params.predict(x)
}

struct Sample<'a, T> {
    x: &'a [SparseVector<T>],
    class: Vec<usize>,
    /// Bootstrap multiplicity per row.
    weight: Vec<T>,
    max_features: usize,
    max_depth: usize,
}

fn gini<T: Scalar>(w: [T; 2]) -> T {
    let total = w[0] + w[1];
    if total <= T::zero() {
        return T::zero();
    }
    let (p, q) = (w[0] / total, w[1] / total);
    T::one() - p * p - q * q
}

struct Split<T> {
    feature: usize,
    threshold: T,
    score: T,
}

impl<T: Scalar> Sample<'_, T> {
    fn class_weights(&self, rows: &[usize]) -> [T; 2] {
        let mut w = [T::zero(); 2];
        for &r in rows {
            w[self.class[r]] += self.weight[r];
        }
        w
    }

    fn grow(&self, rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng, nodes: &mut Vec<Node<T>>) -> usize {
        let at = nodes.len();
        let totals = self.class_weights(&rows);
        let mass = totals[0] + totals[1];
        nodes.push(Node::Leaf { distribution: [totals[0] / mass, totals[1] / mass] });
        if depth >= self.max_depth || rows.len() < 2 || gini(totals) <= T::zero() {
            return at;
        }
        let Some(split) = self.best_split(&rows, totals, rng) else {
            return at;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x[r].get(split.feature) <= split.threshold);
        let left = self.grow(left_rows, depth + 1, rng, nodes);
        let right = self.grow(right_rows, depth + 1, rng, nodes);
        nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }

    fn best_split(&self, rows: &[usize], totals: [T; 2], rng: &mut ChaCha8Rng) -> Option<Split<T>> {
        // Non-zero entries of the node's rows, grouped by feature.
        let mut columns: BTreeMap<usize, Vec<(T, usize, T)>> = BTreeMap::new();
        for &r in rows {
            for (j, v) in self.x[r].iter() {
                columns.entry(j).or_default().push((v, self.class[r], self.weight[r]));
            }
        }
        let n_rows = rows.len();
        let candidates: Vec<usize> = columns
            .iter()
            .filter(|(_, entries)| {
                entries.len() < n_rows || entries.iter().any(|e| e.0 != entries[0].0)
            })
            .map(|(&j, _)| j)
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let k = self.max_features.min(candidates.len());
        let mut chosen: Vec<usize> = sample(rng, candidates.len(), k).into_iter().map(|i| candidates[i]).collect();
        chosen.sort_unstable();

        let parent = gini(totals) * (totals[0] + totals[1]);
        let mut best: Option<Split<T>> = None;
        for feature in chosen {
            let mut entries = columns.remove(&feature).expect("candidate has entries");
            let mut nz = [T::zero(); 2];
            for e in &entries {
                nz[e.1] += e.2;
            }
            let zero_mass = [totals[0] - nz[0], totals[1] - nz[1]];
            if entries.len() < n_rows {
                entries.push((T::zero(), usize::MAX, T::zero()));
            }
            entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
            let mut left = [T::zero(); 2];
            for i in 0..entries.len() - 1 {
                let (v, c, w) = entries[i];
                if c == usize::MAX {
                    left[0] += zero_mass[0];
                    left[1] += zero_mass[1];
                } else {
                    left[c] += w;
                }
                let next = entries[i + 1].0;
                if next == v {
                    continue;
                }
                let right = [totals[0] - left[0], totals[1] - left[1]];
                let score = parent
                    - gini(left) * (left[0] + left[1])
                    - gini(right) * (right[0] + right[1]);
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(Split {
                        feature,
                        threshold: (v + next) / T::of(2.0),
                        score,
                    });
                }
            }
        }
        best
    }
}

/// Grows `n_trees` trees in parallel; tree `i` draws from stream `i` of a
/// generator seeded with `seed`, so the result is independent of thread
/// scheduling.
pub fn forest_fit<T: Scalar>(
    x: &[SparseVector<T>],
    y: &[Label],
    n_trees: usize,
    max_depth: usize,
    seed: u64,
) -> Result<ForestParams<T>> {
    let dim = check_xy(x, y)?;
    if n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be ≥ 1".into()));
    }
    let max_features = ((dim as f64).sqrt() as usize).max(1);
    let n = x.len();
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut weight = vec![T::zero(); n];
            for _ in 0..n {
                weight[rng.random_range(0..n)] += T::one();
            }
            let sample = Sample {
                x,
                class: y.iter().map(|l| l.index()).collect(),
                weight,
                max_features,
                max_depth,
            };
            let rows: Vec<usize> = (0..n).filter(|&r| sample.weight[r] > T::zero()).collect();
            let mut nodes = Vec::new();
            sample.grow(rows, 0, &mut rng, &mut nodes);
            DecisionTree { nodes }
        })
        .collect();
    Ok(ForestParams {
        trees,
        max_depth,
        n_trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(d: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(d)
    }

    fn blobs() -> (Vec<SparseVector<f64>>, Vec<Label>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = (i % 7) as f64;
            if i % 2 == 0 {
                x.push(sv(&[a + 1.0, 0.0, (i % 3) as f64, 1.0]));
                y.push(Label::Informative);
            } else {
                x.push(sv(&[0.0, a + 1.0, (i % 3) as f64, 1.0]));
                y.push(Label::Uninformative);
            }
        }
        (x, y)
    }

    #[test]
    fn pure_data_gives_single_leaves() {
        let x = vec![sv(&[1.0, 0.0]), sv(&[0.0, 2.0]), sv(&[3.0, 1.0])];
        let y = vec![Label::Informative; 3];
        let f = forest_fit(&x, &y, 5, 8, 0).unwrap();
        assert!(f.trees.iter().all(|t| t.nodes.len() == 1));
        assert_eq!(f.predict(&sv(&[9.0, 9.0])), Label::Informative);
        assert_eq!(f.predict(&sv(&[0.0, 0.0])), Label::Informative);
    }

    #[test]
    fn learns_separable_blobs() {
        let (x, y) = blobs();
        let f = forest_fit(&x, &y, 25, 8, 42).unwrap();
        let correct = x.iter().zip(&y).filter(|(xi, &yi)| f.predict(xi) == yi).count();
        assert_eq!(correct, x.len());
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = blobs();
        assert_eq!(forest_fit(&x, &y, 10, 8, 7).unwrap(), forest_fit(&x, &y, 10, 8, 7).unwrap());
        assert_ne!(forest_fit(&x, &y, 10, 8, 7).unwrap(), forest_fit(&x, &y, 10, 8, 8).unwrap());
    }

    #[test]
    fn depth_limit_is_respected() {
        let (x, y) = blobs();
        let f = forest_fit(&x, &y, 10, 1, 0).unwrap();
        assert!(f.trees.iter().all(|t| t.depth() <= 1));
    }

    #[test]
    fn empty_input_is_error() {
        assert!(forest_fit::<f64>(&[], &[], 3, 8, 0).is_err());
    }

    proptest! {
        #[test]
        fn structural_invariants(seed in any::<u64>(), n_trees in 1usize..12, depth in 1usize..9,
                                 flips in prop::collection::vec(any::<bool>(), 40)) {
            let (x, mut y) = blobs();
            for (l, f) in y.iter_mut().zip(&flips) {
                if *f { *l = if *l == Label::Informative { Label::Uninformative } else { Label::Informative }; }
            }
            let f = forest_fit(&x, &y, n_trees, depth, seed).unwrap();
            prop_assert_eq!(f.trees.len(), n_trees);
            for t in &f.trees {
                prop_assert!(t.depth() <= depth);
                for d in t.leaves() {
                    prop_assert!((d[0] + d[1] - 1.0).abs() < 1e-12);
                }
            }
            for xi in &x {
                let v = f.votes(xi);
                prop_assert_eq!(v.informative + v.uninformative, n_trees);
            }
        }
    }
}
