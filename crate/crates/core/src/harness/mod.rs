//! Grid-search model selection under competing criteria, replicated
//! simulation studies, and AUC*-vs-KL* comparison reports.

mod grid;
mod output;
mod report;
mod study;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use grid::{power_grid, run_grid, select, Candidate, GridPoint, GridSearch, GridSpec, LearnerKind};
pub use output::{
    expected_files, histogram_file, selection_slug,
    validate_study_outputs, write_real_data_outputs, write_study_outputs, Manifest, AGGREGATE_HEADER, DELTAS_HEADER,
    REPLICATIONS_HEADER, SELECTION_HEADER,
};
pub use report::{real_data_study, Deltas, RealDataConfig, RealDataReport, SelectionEntry, SelectionReport};
pub use study::{
    aggregate, delta_table, replicate, AggregateRow, DeltaRow, MeanSd, ReplicationRow, StudyConfig, StudyResult,
};

use crate::data::Dataset;
use crate::distributions::BetaPrior;
use crate::error::{Error, Result};
use crate::metrics::ReferenceProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "MSE*")]
    Mse,
    #[serde(rename = "AUC*")]
    Auc,
    #[serde(rename = "Brier*")]
    Brier,
    #[serde(rename = "ICI*")]
    Ici,
    #[serde(rename = "KL*")]
    Kl,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Mse,
        Criterion::Auc,
        Criterion::Brier,
        Criterion::Ici,
        Criterion::Kl,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Mse => "MSE*",
            Criterion::Auc => "AUC*",
            Criterion::Brier => "Brier*",
            Criterion::Ici => "ICI*",
            Criterion::Kl => "KL*",
        }
    }

    pub fn maximize(self) -> bool {
        self == Criterion::Auc
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_end_matches('*').to_ascii_lowercase().as_str() {
            "mse" => Ok(Criterion::Mse),
            "auc" => Ok(Criterion::Auc),
            "brier" => Ok(Criterion::Brier),
            "ici" => Ok(Criterion::Ici),
            "kl" => Ok(Criterion::Kl),
            _ => Err(Error::Parameter(format!("unknown criterion `{s}`"))),
        }
    }
}

/// What the KL and QR columns compare scores against.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceDistribution {
    /// The evaluation split's own true-probability column.
    TrueProbabilities,
    BetaPrior(BetaPrior),
}

impl ReferenceDistribution {
    /// Reference for one evaluation split.
    pub fn profile(&self, split: &Dataset) -> Result<ReferenceProfile> {
        match self {
            ReferenceDistribution::TrueProbabilities => {
                let p = split.true_prob().ok_or_else(|| {
                    Error::Domain("true-probability reference requested for data without true probabilities".into())
                })?;
                ReferenceProfile::from_true_probabilities(p)
            }
            ReferenceDistribution::BetaPrior(prior) => {
                let mut profile = ReferenceProfile::from_beta(prior);
                profile.truth = split.true_prob().map(<[f64]>::to_vec);
                Ok(profile)
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    grids: Vec<GridSpec>,
}

/// Parse a grid override file: a list of `[[grids]]` tables, each tagged by
/// `learner = "tree" | "forest" | "boost"`.
pub fn grids_from_toml_str(text: &str) -> Result<Vec<GridSpec>> {
    let file: GridFile = toml::from_str(text)?;
    Ok(file.grids)
}
