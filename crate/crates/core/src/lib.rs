//! Hyperparameter selection for binary-outcome scores by matching the score
//! distribution to a prior, alongside the usual AUC / Brier / calibration
//! criteria.

pub mod data;
pub mod dgp;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
