//! Synthetic logistic data-generating processes and rejection resampling of
//! score distributions.

mod resample;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use resample::{
    resample_iterative, resample_rejection, resample_rejection_with_density, IterativeOptions, IterativeOutcome,
    RejectionOptions, RejectionOutcome, TargetDistribution, UniformTarget, DEFAULT_C_MAX, DEFAULT_SURVIVOR_FLOOR,
};

use crate::data::{write_csv, Dataset, FeatureColumn};
use crate::error::{Error, Result};
use crate::learners::sigmoid;
use crate::rng::stream;

const GENERATE_STREAM: u64 = 0x6745;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DgpId {
    #[serde(rename = "1")]
    Dgp1,
    #[serde(rename = "2")]
    Dgp2,
    #[serde(rename = "3")]
    Dgp3,
    #[serde(rename = "4")]
    Dgp4,
}

impl DgpId {
    pub const ALL: [DgpId; 4] = [DgpId::Dgp1, DgpId::Dgp2, DgpId::Dgp3, DgpId::Dgp4];

    pub fn number(self) -> u8 {
        match self {
            DgpId::Dgp1 => 1,
            DgpId::Dgp2 => 2,
            DgpId::Dgp3 => 3,
            DgpId::Dgp4 => 4,
        }
    }
}

impl fmt::Display for DgpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DGP{}", self.number())
    }
}

impl FromStr for DgpId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.strip_prefix("dgp").unwrap_or(&t) {
            "1" => Ok(DgpId::Dgp1),
            "2" => Ok(DgpId::Dgp2),
            "3" => Ok(DgpId::Dgp3),
            "4" => Ok(DgpId::Dgp4),
            _ => Err(Error::Parameter(format!("unknown DGP `{s}` (expected 1-4)"))),
        }
    }
}

/// Categorical predictors of DGP3: level counts and coefficients. Each
/// variable adds `coefficient * level` to the linear predictor.
pub const DGP3_LEVELS: [usize; 5] = [2, 2, 3, 5, 2];
pub const DGP3_CATEGORICAL_BETA: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub id: DgpId,
    pub n_noise: usize,
    pub seed: u64,
    /// DGP4 coefficients of `x1²` and `x2·x3`.
    #[serde(default = "default_nonlinear")]
    pub nonlinear: [f64; 2],
}

fn default_nonlinear() -> [f64; 2] {
    [0.5, 0.5]
}

impl DgpSpec {
    pub fn new(id: DgpId, n_noise: usize, seed: u64) -> Self {
        Self {
            id,
            n_noise,
            seed,
            nonlinear: default_nonlinear(),
        }
    }

    /// Coefficients of the continuous predictors.
    pub fn continuous_beta(&self) -> &'static [f64] {
        match self.id {
            DgpId::Dgp1 | DgpId::Dgp2 => &[0.5, 1.0],
            DgpId::Dgp3 => &[0.1, 0.2, 0.3, 0.4, 0.5],
            DgpId::Dgp4 => &[0.5, 1.0, 0.3],
        }
    }

    pub fn categorical_levels(&self) -> &'static [usize] {
        match self.id {
            DgpId::Dgp3 => &DGP3_LEVELS,
            _ => &[],
        }
    }

    /// Linear predictor from continuous values and categorical level codes.
    pub fn eta(&self, continuous: &[f64], levels: &[usize]) -> f64 {
        let mut eta: f64 = continuous.iter().zip(self.continuous_beta()).map(|(x, b)| x * b).sum();
        eta += levels
            .iter()
            .zip(DGP3_CATEGORICAL_BETA)
            .map(|(&l, b)| b * l as f64)
            .sum::<f64>();
        if self.id == DgpId::Dgp4 {
            eta += self.nonlinear[0] * continuous[0] * continuous[0] + self.nonlinear[1] * continuous[1] * continuous[2];
        }
        eta
    }

    /// True probability for a linear predictor.
    pub fn link(&self, eta: f64) -> f64 {
        let p = sigmoid(eta);
        if self.id == DgpId::Dgp2 {
            p * p * p
        } else {
            p
        }
    }

    fn columns(&self) -> Vec<FeatureColumn> {
        let mut cols: Vec<FeatureColumn> = (1..=self.continuous_beta().len())
            .map(|j| FeatureColumn::numeric(format!("x{j}")))
            .collect();
        for (v, &k) in self.categorical_levels().iter().enumerate() {
            let name = format!("c{}", v + 1);
            cols.extend((0..k).map(|l| FeatureColumn::indicator(&name, &l.to_string())));
        }
        cols.extend((1..=self.n_noise).map(|j| FeatureColumn::numeric(format!("noise{j}"))));
        cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub dataset: Dataset,
    pub spec: DgpSpec,
}

impl GeneratedSample {
    pub fn true_prob(&self) -> &[f64] {
        self.dataset.true_prob().expect("generated samples carry true probabilities")
    }

    pub fn subset(&self, indices: &[usize]) -> GeneratedSample {
        GeneratedSample {
            dataset: self.dataset.subset(indices),
            spec: self.spec,
        }
    }

    /// CSV export including the `true_probability` column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_csv(&self.dataset, writer)
    }
}

/// Draw `n` rows from the process described by `spec`.
///
/// Within a row the draws are: continuous predictors, categorical levels,
/// noise columns, then the outcome uniform.
pub fn generate(spec: &DgpSpec, n: usize) -> Result<GeneratedSample> {
    if n == 0 {
        return Err(Error::Parameter("sample size must be at least 1".into()));
    }
    let mut rng = stream(spec.seed, &[GENERATE_STREAM]);
    let columns = spec.columns();
    let p = columns.len();
    let k = spec.continuous_beta().len();
    let levels_of = spec.categorical_levels();

    let mut features = Vec::with_capacity(n * p);
    let mut target = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut cont = vec![0.0; k];
    let mut levels = vec![0usize; levels_of.len()];
    for _ in 0..n {
        for c in cont.iter_mut() {
            *c = StandardNormal.sample(&mut rng);
        }
        for (l, &m) in levels.iter_mut().zip(levels_of) {
            *l = rng.random_range(0..m);
        }
        features.extend_from_slice(&cont);
        for (&l, &m) in levels.iter().zip(levels_of) {
            features.extend((0..m).map(|j| f64::from(u8::from(j == l))));
        }
        for _ in 0..spec.n_noise {
            features.push(StandardNormal.sample(&mut rng));
        }
        let prob = spec.link(spec.eta(&cont, &levels));
        let u: f64 = rng.random();
        truth.push(prob);
        target.push(f64::from(u8::from(u < prob)));
    }
    Ok(GeneratedSample {
        dataset: Dataset::new(features, columns, target, Some(truth))?,
        spec: *spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_examples() {
        let d1 = DgpSpec::new(DgpId::Dgp1, 0, 0);
        assert_eq!(d1.link(d1.eta(&[0.0, 0.0], &[])), 0.5);
        let d2 = DgpSpec::new(DgpId::Dgp2, 0, 0);
        assert_eq!(d2.link(0.0), 0.125);
    }

    #[test]
    fn feature_layout() {
        let s = generate(&DgpSpec::new(DgpId::Dgp3, 10, 1), 20).unwrap();
        assert_eq!(s.dataset.n_features(), 5 + 14 + 10);
        let d4 = generate(&DgpSpec::new(DgpId::Dgp4, 0, 1), 5).unwrap();
        assert_eq!(d4.dataset.feature_names(), vec!["x1", "x2", "x3"]);
    }

    #[test]
    fn parses_ids() {
        assert_eq!("dgp3".parse::<DgpId>().unwrap(), DgpId::Dgp3);
        assert_eq!("4".parse::<DgpId>().unwrap(), DgpId::Dgp4);
        assert!("5".parse::<DgpId>().is_err());
    }
}
