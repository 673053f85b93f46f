//! Performance, calibration and distribution-shape metrics for binary scores.

mod calibration;
mod ranking;
mod spread;

pub use calibration::{brier, calibration_curve, ici, CalibrationCurve, Ici, ICI_GRID_POINTS, ICI_GRID_THRESHOLD, LOESS_SPAN};
pub use ranking::auc;
pub use spread::{interdecile_range, mse_vs_truth, quantile_ratio, quantile_ratio_to_spread};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distributions::{histogram, kl_divergence, BetaPrior, ScoreHistogram, DEFAULT_BINS};
use crate::error::{Error, Result};

/// Number of quantile points used to discretize a Beta reference.
pub const BETA_REFERENCE_POINTS: u64 = 100_000;

/// Test- or validation-set metrics for one set of scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub auc: f64,
    pub brier: f64,
    pub ici: f64,
    pub kl: f64,
    pub qr: f64,
    pub mse_vs_truth: Option<f64>,
}

impl MetricTable {
    pub const CSV_HEADER: [&'static str; 6] = ["mse", "auc", "brier", "ici", "kl", "qr"];

    pub fn csv_fields(&self) -> [String; 6] {
        [
            self.mse_vs_truth.map(|v| v.to_string()).unwrap_or_default(),
            self.auc.to_string(),
            self.brier.to_string(),
            self.ici.to_string(),
            self.kl.to_string(),
            self.qr.to_string(),
        ]
    }

    /// One CSV row per (dataset, model, criterion), columns laid out as
    /// `dataset,model,criterion,mse,auc,brier,ici,kl,qr`.
    pub fn write_csv_rows<W: Write>(rows: &[(String, String, String, MetricTable)], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["dataset", "model", "criterion"];
        header.extend(Self::CSV_HEADER);
        w.write_record(&header)?;
        for (dataset, model, criterion, table) in rows {
            let mut rec = vec![dataset.clone(), model.clone(), criterion.clone()];
            rec.extend(table.csv_fields());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything the metrics need to know about the reference distribution of
/// one evaluation split.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile {
    pub histogram: ScoreHistogram,
    /// q90 − q10 of the reference.
    pub interdecile: f64,
    /// Per-observation true probabilities, when known.
    pub truth: Option<Vec<f64>>,
}

impl ReferenceProfile {
    pub fn from_true_probabilities(p: &[f64]) -> Result<Self> {
        Ok(Self {
            histogram: histogram(p, DEFAULT_BINS)?,
            interdecile: interdecile_range(p),
            truth: Some(p.to_vec()),
        })
    }

    /// Histogram from the quantiles at `(k − 0.5)/N`, `N = 10⁵`.
    pub fn from_beta(prior: &BetaPrior) -> Self {
        Self {
            histogram: ScoreHistogram::from_quantile_grid(
                |t| prior.cdf(t),
                BETA_REFERENCE_POINTS,
                DEFAULT_BINS,
            ),
            interdecile: prior.quantile(0.9) - prior.quantile(0.1),
            truth: None,
        }
    }

    pub fn kl(&self, scores: &[f64]) -> Result<f64> {
        kl_divergence(&histogram(scores, self.histogram.bin_count)?, &self.histogram)
    }
}

/// Full metric table of `scores` against `labels` and a reference.
pub fn metric_table(scores: &[f64], labels: &[f64], reference: &ReferenceProfile) -> Result<MetricTable> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    Ok(MetricTable {
        auc: auc(scores, labels)?,
        brier: brier(scores, labels)?,
        ici: ici(scores, labels)?.value,
        kl: reference.kl(scores)?,
        qr: quantile_ratio_to_spread(scores, reference.interdecile)?,
        mse_vs_truth: reference
            .truth
            .as_deref()
            .map(|t| mse_vs_truth(scores, Some(t)))
            .transpose()?,
    })
}
