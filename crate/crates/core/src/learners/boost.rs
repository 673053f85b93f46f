use serde::{Deserialize, Serialize};

use super::tree::{check_width, fit_tree_on, RegressionTree, TreeParams};
use super::TrainingMatrix;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Squared-loss gradient boosting settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_rounds: usize,
    /// Recorded for reproducibility; fitting itself draws no randomness.
    pub seed: u64,
}

impl BoostParams {
    pub fn new(max_depth: usize, n_rounds: usize, seed: u64) -> Self {
        Self {
            learning_rate: 0.3,
            max_depth,
            n_rounds,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Parameter(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        if self.n_rounds == 0 {
            return Err(Error::Parameter("n_rounds must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Parameter("max_depth must be at least 1".into()));
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            min_bucket: 1,
            min_split: 2,
            max_depth: Some(self.max_depth),
            complexity_penalty: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub params: BoostParams,
    pub base_score: f64,
    pub trees: Vec<RegressionTree>,
    pub n_features: usize,
}

impl BoostModel {
    pub fn rounds(&self) -> usize {
        self.trees.len()
    }

    fn check_round(&self, at_round: usize) -> Result<()> {
        if at_round == 0 || at_round > self.trees.len() {
            return Err(Error::Range {
                requested: at_round,
                available: self.trees.len(),
            });
        }
        Ok(())
    }

    /// Unclipped additive prediction `F_t(row)`.
    pub fn raw_row(&self, row: &[f64], at_round: usize) -> f64 {
        let lr = self.params.learning_rate;
        self.trees[..at_round]
            .iter()
            .fold(self.base_score, |f, t| f + lr * t.predict_row(row))
    }

    pub fn predict_raw(&self, ds: &Dataset, at_round: usize) -> Result<Vec<f64>> {
        check_width(self.n_features, ds)?;
        self.check_round(at_round)?;
        Ok(ds.rows().map(|r| self.raw_row(r, at_round)).collect())
    }

    /// Scores after `at_round` rounds, clipped to [0, 1].
    pub fn predict(&self, ds: &Dataset, at_round: usize) -> Result<Vec<f64>> {
        let mut s = self.predict_raw(ds, at_round)?;
        s.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Ok(s)
    }

    /// Clipped scores for every round `1..=rounds()` in one pass.
    pub fn staged(&self, ds: &Dataset) -> Result<StagedScores<'_>> {
        check_width(self.n_features, ds)?;
        Ok(StagedScores {
            model: self,
            rows: ds.rows().map(<[f64]>::to_vec).collect(),
            raw: vec![self.base_score; ds.n()],
            round: 0,
        })
    }
}

/// Iterator over `(round, clipped scores)`.
pub struct StagedScores<'a> {
    model: &'a BoostModel,
    rows: Vec<Vec<f64>>,
    raw: Vec<f64>,
    round: usize,
}

impl Iterator for StagedScores<'_> {
    type Item = (usize, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        let tree = self.model.trees.get(self.round)?;
        let lr = self.model.params.learning_rate;
        for (f, row) in self.raw.iter_mut().zip(&self.rows) {
            *f += lr * tree.predict_row(row);
        }
        self.round += 1;
        Some((self.round, self.raw.iter().map(|v| v.clamp(0.0, 1.0)).collect()))
    }
}

pub fn fit_boost(train: &Dataset, params: &BoostParams) -> Result<BoostModel> {
    fit_boost_on(&TrainingMatrix::new(train), train.target(), params)
}

pub fn fit_boost_on(matrix: &TrainingMatrix, targets: &[f64], params: &BoostParams) -> Result<BoostModel> {
    params.validate()?;
    if targets.len() != matrix.n() {
        return Err(Error::Dimension {
            expected: matrix.n(),
            got: targets.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::Domain("cannot boost on zero rows".into()));
    }
    let base = targets.iter().sum::<f64>() / targets.len() as f64;
    let tp = params.tree_params();
    let mut fitted = vec![base; targets.len()];
    let mut residual = vec![0.0; targets.len()];
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for ((r, y), f) in residual.iter_mut().zip(targets).zip(&fitted) {
            *r = y - f;
        }
        let tree = fit_tree_on(matrix, &residual, &tp)?;
        let cols: Vec<&[f64]> = (0..matrix.p()).map(|j| matrix.col(j)).collect();
        let mut row = vec![0.0; cols.len()];
        for (i, f) in fitted.iter_mut().enumerate() {
            for (v, c) in row.iter_mut().zip(&cols) {
                *v = c[i];
            }
            *f += params.learning_rate * tree.predict_row(&row);
        }
        trees.push(tree);
    }
    Ok(BoostModel {
        params: *params,
        base_score: base,
        trees,
        n_features: matrix.p(),
    })
}
