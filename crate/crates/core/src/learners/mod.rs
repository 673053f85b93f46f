//! Regression learners producing scores in [0, 1]: CART, random forest,
//! squared-loss gradient boosting and logistic regression.

mod boost;
mod forest;
mod grow;
mod logistic;
mod matrix;
mod tree;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use boost::{fit_boost, fit_boost_on, BoostModel, BoostParams, StagedScores};
pub use forest::{fit_forest, fit_forest_on, Forest, ForestParams};
pub use logistic::{
    design_rows, fit_logistic, gradient, gradient_check, log_likelihood, sigmoid, Design, LogisticModel,
    MAX_ITERATIONS, SCORE_TOLERANCE, SEPARATION_LIMIT,
};
pub use matrix::TrainingMatrix;
pub use tree::{fit_tree, fit_tree_on, Node, RegressionTree, TreeParams};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Tree { params: TreeParams, tree: RegressionTree },
    Forest(Forest),
    Boost { model: BoostModel, rounds: usize },
    Logistic(LogisticModel),
}

impl FittedModel {
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        match self {
            FittedModel::Tree { tree, .. } => tree.predict(ds),
            FittedModel::Forest(f) => f.predict(ds),
            FittedModel::Boost { model, rounds } => model.predict(ds, *rounds),
            FittedModel::Logistic(m) => m.predict(ds),
        }
    }
}

/// Versioned JSON envelope for a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub seed: Option<u64>,
    pub model: FittedModel,
}

impl ModelDocument {
    pub fn new(model: FittedModel, seed: Option<u64>) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            seed,
            model,
        }
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let doc: Self = serde_json::from_reader(reader)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc)
    }
}
