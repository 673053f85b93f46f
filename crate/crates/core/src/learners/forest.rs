use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grow::grow_sampled;
use super::tree::{check_width, RegressionTree, TreeParams};
use super::TrainingMatrix;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub mtry: usize,
    pub min_bucket: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl ForestParams {
    pub fn new(mtry: usize, min_bucket: usize, seed: u64) -> Self {
        Self {
            n_trees: 250,
            mtry,
            min_bucket,
            bootstrap: true,
            seed,
        }
    }

    fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Parameter("n_trees must be at least 1".into()));
        }
        if self.min_bucket == 0 {
            return Err(Error::Parameter("min_bucket must be at least 1".into()));
        }
        if self.mtry == 0 || self.mtry > n_features {
            return Err(Error::Parameter(format!(
                "mtry = {} must lie in 1..={n_features}",
                self.mtry
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub params: ForestParams,
    pub trees: Vec<RegressionTree>,
    pub n_features: usize,
}

impl Forest {
    /// Unweighted mean of the tree predictions, accumulated in tree order.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        check_width(self.n_features, ds)?;
        Ok((0..ds.n()).into_par_iter().map(|i| self.predict_row(ds.row(i))).collect())
    }
}

pub fn fit_forest(train: &Dataset, params: &ForestParams) -> Result<Forest> {
    fit_forest_on(&TrainingMatrix::new(train), train.target(), params)
}

/// Trees are grown in parallel; each draws from its own stream keyed by
/// `(seed, tree index)`, so the result does not depend on the thread count.
pub fn fit_forest_on(matrix: &TrainingMatrix, targets: &[f64], params: &ForestParams) -> Result<Forest> {
    params.validate(matrix.p())?;
    let n = matrix.n();
    if targets.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: targets.len(),
        });
    }
    if n == 0 {
        return Err(Error::Domain("cannot fit a forest on zero rows".into()));
    }
    let cfg = TreeParams::with_min_bucket(params.min_bucket).grow_config();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(params.seed, &[t as u64]);
            let mut weights = vec![0.0f64; n];
            let sample: Vec<u32> = if params.bootstrap {
                for _ in 0..n {
                    weights[rng.random_range(0..n)] += 1.0;
                }
                (0..n as u32).filter(|&r| weights[r as usize] > 0.0).collect()
            } else {
                weights.fill(1.0);
                (0..n as u32).collect()
            };
            grow_sampled(matrix, targets, &sample, &weights, params.mtry, &cfg, &mut rng)
        })
        .collect();
    Ok(Forest {
        params: *params,
        trees,
        n_features: matrix.p(),
    })
}
