//! Tabular datasets: feature matrix, binary target, optional true probabilities.

mod csv_io;
mod split;

pub use csv_io::{load_csv, read_csv, write_csv, write_schema};
pub use split::{split, SplitIndices};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of distinct levels accepted for a categorical column.
pub const MAX_LEVELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Target,
    TrueProbability,
    Ignore,
}

impl FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "numeric" => Ok(ColumnKind::Numeric),
            "categorical" => Ok(ColumnKind::Categorical),
            "target" => Ok(ColumnKind::Target),
            "true_probability" => Ok(ColumnKind::TrueProbability),
            "ignore" => Ok(ColumnKind::Ignore),
            other => Err(Error::Config(format!("unknown column kind `{other}`"))),
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Target => "target",
            ColumnKind::TrueProbability => "true_probability",
            ColumnKind::Ignore => "ignore",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

/// Column schema for CSV ingestion. Exactly one target, at most one
/// true-probability column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let targets = columns.iter().filter(|c| c.kind == ColumnKind::Target).count();
        if targets != 1 {
            return Err(Error::Schema {
                column: "<target>".into(),
                reason: format!("expected exactly one target column, found {targets}"),
            });
        }
        let probs = columns
            .iter()
            .filter(|c| c.kind == ColumnKind::TrueProbability)
            .count();
        if probs > 1 {
            return Err(Error::Schema {
                column: "<true_probability>".into(),
                reason: format!("at most one true-probability column allowed, found {probs}"),
            });
        }
        let mut seen = BTreeMap::new();
        for c in &columns {
            if seen.insert(c.name.as_str(), ()).is_some() {
                return Err(Error::Schema {
                    column: c.name.clone(),
                    reason: "duplicate column name".into(),
                });
            }
        }
        Ok(Self { columns })
    }

    /// Parse a `name = "kind"` TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text)?;
        let mut columns = Vec::with_capacity(table.len());
        for (name, value) in table {
            let kind = value
                .as_str()
                .ok_or_else(|| Error::Config(format!("kind of `{name}` must be a string")))?
                .parse()?;
            columns.push(ColumnSpec { name, kind });
        }
        Self::new(columns)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        let mut out = String::new();
        for c in &self.columns {
            out.push_str(&format!("{} = \"{}\"\n", toml_key(&c.name), c.kind));
        }
        out
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn kind_of(&self, name: &str) -> Option<ColumnKind> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.kind)
    }
}

fn toml_key(name: &str) -> String {
    if !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

/// Where an encoded feature column came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureOrigin {
    Numeric,
    /// One-hot indicator for `level` of categorical `variable`.
    Indicator { variable: String, level: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub origin: FeatureOrigin,
}

impl FeatureColumn {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            origin: FeatureOrigin::Numeric,
        }
    }

    pub fn indicator(variable: &str, level: &str) -> Self {
        Self {
            name: format!("{variable}={level}"),
            origin: FeatureOrigin::Indicator {
                variable: variable.to_string(),
                level: level.to_string(),
            },
        }
    }

    pub fn variable(&self) -> Option<&str> {
        match &self.origin {
            FeatureOrigin::Numeric => None,
            FeatureOrigin::Indicator { variable, .. } => Some(variable),
        }
    }
}

/// Immutable dataset with a dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_rows: usize,
    columns: Vec<FeatureColumn>,
    target: Vec<f64>,
    true_prob: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        columns: Vec<FeatureColumn>,
        target: Vec<f64>,
        true_prob: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n_rows = target.len();
        let expected = n_rows * columns.len();
        if features.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: features.len(),
            });
        }
        if let Some(pos) = target.iter().position(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::Domain(format!(
                "target value {} at row {pos} is not 0 or 1",
                target[pos]
            )));
        }
        if let Some(p) = &true_prob {
            if p.len() != n_rows {
                return Err(Error::Dimension {
                    expected: n_rows,
                    got: p.len(),
                });
            }
            if let Some(pos) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Domain(format!(
                    "true probability {} at row {pos} outside [0, 1]",
                    p[pos]
                )));
            }
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            let p = columns.len().max(1);
            return Err(Error::Domain(format!(
                "non-finite feature at row {}, column `{}`",
                pos / p,
                columns[pos % p].name
            )));
        }
        Ok(Self {
            features,
            n_rows,
            columns,
            target,
            true_prob,
        })
    }

    pub fn n(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.columns.len();
        &self.features[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.columns.len() + col]
    }

    /// Copy of feature `col` as a contiguous vector.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.value(i, col)).collect()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn true_prob(&self) -> Option<&[f64]> {
        self.true_prob.as_deref()
    }

    /// Dataset restricted to `indices` (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let p = self.columns.len();
        let mut features = Vec::with_capacity(indices.len() * p);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_rows: indices.len(),
            columns: self.columns.clone(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            true_prob: self
                .true_prob
                .as_ref()
                .map(|p| indices.iter().map(|&i| p[i]).collect()),
        }
    }

    /// Same rows without the true-probability column.
    pub fn without_true_prob(&self) -> Dataset {
        Dataset {
            true_prob: None,
            ..self.clone()
        }
    }

    /// Train, validation and test datasets for a split.
    pub fn partition(&self, split: &SplitIndices) -> (Dataset, Dataset, Dataset) {
        (
            self.subset(&split.train),
            self.subset(&split.validation),
            self.subset(&split.test),
        )
    }

    pub fn positive_rate(&self) -> f64 {
        self.target.iter().sum::<f64>() / self.n_rows.max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_binary_target() {
        let err = Dataset::new(vec![0.0, 1.0], vec![FeatureColumn::numeric("x")], vec![0.0, 2.0], None);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_non_finite_feature() {
        let err = Dataset::new(
            vec![0.0, f64::NAN],
            vec![FeatureColumn::numeric("x")],
            vec![0.0, 1.0],
            None,
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn schema_requires_one_target() {
        let cols = vec![ColumnSpec::new("x", ColumnKind::Numeric)];
        assert!(Schema::new(cols).is_err());
        let cols = vec![
            ColumnSpec::new("y", ColumnKind::Target),
            ColumnSpec::new("z", ColumnKind::Target),
        ];
        assert!(Schema::new(cols).is_err());
    }

    #[test]
    fn schema_toml_round_trip() {
        let text = "x1 = \"numeric\"\ncolour = \"categorical\"\ny = \"target\"\np = \"true_probability\"\n";
        let schema = Schema::from_toml_str(text).unwrap();
        let again = Schema::from_toml_str(&schema.to_toml_string()).unwrap();
        assert_eq!(schema, again);
        assert_eq!(schema.kind_of("colour"), Some(ColumnKind::Categorical));
    }

    #[test]
    fn subset_keeps_alignment() {
        let ds = Dataset::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec![FeatureColumn::numeric("a"), FeatureColumn::numeric("b")],
            vec![0.0, 1.0, 1.0],
            Some(vec![0.1, 0.2, 0.3]),
        )
        .unwrap();
        let s = ds.subset(&[2, 0]);
        assert_eq!(s.row(0), &[5.0, 6.0]);
        assert_eq!(s.target(), &[1.0, 0.0]);
        assert_eq!(s.true_prob().unwrap(), &[0.3, 0.1]);
    }
}
