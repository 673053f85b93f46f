use serde::{Deserialize, Serialize};

use super::grow::{grow_presorted, GrowConfig};
use super::TrainingMatrix;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// CART settings. Tree size is controlled through `min_bucket`; the
/// complexity penalty defaults to zero so very large trees remain reachable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_bucket: usize,
    pub min_split: usize,
    pub max_depth: Option<usize>,
    pub complexity_penalty: f64,
}

impl TreeParams {
    /// rpart-style defaults: `min_split = 3 · min_bucket`, no penalty.
    pub fn with_min_bucket(min_bucket: usize) -> Self {
        let min_bucket = min_bucket.max(1);
        Self {
            min_bucket,
            min_split: 3 * min_bucket,
            max_depth: None,
            complexity_penalty: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_bucket == 0 {
            return Err(Error::Parameter("min_bucket must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Parameter("max_depth must be at least 1".into()));
        }
        if !(self.complexity_penalty >= 0.0) {
            return Err(Error::Parameter("complexity_penalty must be non-negative".into()));
        }
        Ok(())
    }

    pub(crate) fn grow_config(&self) -> GrowConfig {
        GrowConfig {
            min_bucket: self.min_bucket as f64,
            min_split: self.min_split.max(2) as f64,
            max_depth: self.max_depth,
            complexity_penalty: self.complexity_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
        weight: f64,
    },
}

/// Binary regression tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

impl RegressionTree {
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf reached by `row`.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature as usize] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn try_predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::Dimension {
                expected: self.n_features,
                got: row.len(),
            });
        }
        Ok(self.predict_row(row))
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        check_width(self.n_features, ds)?;
        Ok(ds.rows().map(|r| self.predict_row(r)).collect())
    }

    /// Leaf values in node order.
    pub fn leaf_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, .. } => Some(*value),
            _ => None,
        })
    }
}

pub(crate) fn check_width(expected: usize, ds: &Dataset) -> Result<()> {
    if ds.n_features() != expected {
        return Err(Error::Dimension {
            expected,
            got: ds.n_features(),
        });
    }
    Ok(())
}

/// Fit a CART regression tree on the binary target of `train`.
pub fn fit_tree(train: &Dataset, params: &TreeParams) -> Result<RegressionTree> {
    fit_tree_on(&TrainingMatrix::new(train), train.target(), params)
}

/// Fit on a prepared matrix; `targets` may be any real response.
pub fn fit_tree_on(matrix: &TrainingMatrix, targets: &[f64], params: &TreeParams) -> Result<RegressionTree> {
    params.validate()?;
    if targets.len() != matrix.n() {
        return Err(Error::Dimension {
            expected: matrix.n(),
            got: targets.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::Domain("cannot fit a tree on zero rows".into()));
    }
    Ok(grow_presorted(matrix, targets, &params.grow_config()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureColumn;

    fn step_data(n: usize) -> Dataset {
        let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| f64::from(u8::from(v > 0.0))).collect();
        Dataset::new(x, vec![FeatureColumn::numeric("x")], y, None).unwrap()
    }

    #[test]
    fn separable_step_gives_two_leaves() {
        let ds = step_data(100);
        let tree = fit_tree(&ds, &TreeParams::with_min_bucket(5)).unwrap();
        assert_eq!(tree.leaf_count(), 2);
        match tree.nodes[0] {
            Node::Split { threshold, .. } => assert!(threshold.abs() < 0.03, "{threshold}"),
            _ => panic!("root should split"),
        }
        let mut leaves: Vec<f64> = tree.leaf_values().collect();
        leaves.sort_by(f64::total_cmp);
        assert_eq!(leaves, vec![0.0, 1.0]);
    }

    #[test]
    fn min_bucket_n_gives_single_leaf() {
        let ds = step_data(40);
        let tree = fit_tree(&ds, &TreeParams::with_min_bucket(40)).unwrap();
        assert_eq!(tree.leaf_count(), 1);
        assert_eq!(tree.predict_row(&[0.7]), 0.5);
    }

    #[test]
    fn too_few_rows_gives_root_mean() {
        let ds = step_data(10);
        let tree = fit_tree(&ds, &TreeParams::with_min_bucket(4)).unwrap();
        assert_eq!(tree.leaf_count(), 1);
    }

    #[test]
    fn training_rows_predict_their_leaf_mean() {
        let x: Vec<f64> = (0..60).map(|i| ((i * 37) % 60) as f64).collect();
        let y: Vec<f64> = (0..60).map(|i| f64::from(u8::from(i % 3 == 0 || i > 40))).collect();
        let ds = Dataset::new(x, vec![FeatureColumn::numeric("x")], y.clone(), None).unwrap();
        let tree = fit_tree(&ds, &TreeParams::with_min_bucket(3)).unwrap();
        let leaves: Vec<usize> = ds.rows().map(|r| tree.leaf_index(r)).collect();
        for (i, &leaf) in leaves.iter().enumerate() {
            let members: Vec<f64> = (0..60).filter(|&j| leaves[j] == leaf).map(|j| y[j]).collect();
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert!((tree.predict_row(ds.row(i)) - mean).abs() < 1e-12);
            assert!(members.len() >= 3);
        }
    }

    #[test]
    fn width_mismatch() {
        let ds = step_data(20);
        let tree = fit_tree(&ds, &TreeParams::with_min_bucket(2)).unwrap();
        assert!(matches!(tree.try_predict_row(&[0.1, 0.2]), Err(Error::Dimension { .. })));
    }
}
