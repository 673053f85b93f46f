use serde::{Deserialize, Serialize};

use super::ScoreHistogram;
use crate::error::{Error, Result};

/// Zero-bin handling for the histogram KL divergence.
///
/// The raw divergence is infinite whenever the reference has an empty bin the
/// scores occupy. Laplace smoothing adds `pseudo_count` to every raw bin count
/// of both histograms before normalizing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smoothing {
    Laplace { pseudo_count: f64 },
    None,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Laplace { pseudo_count: 1.0 }
    }
}

impl Smoothing {
    fn apply(&self, h: &ScoreHistogram) -> Vec<f64> {
        match *self {
            Smoothing::Laplace { pseudo_count } => {
                let total = h.sample_size as f64 + pseudo_count * h.bin_count as f64;
                h.counts
                    .iter()
                    .map(|&c| (c as f64 + pseudo_count) / total)
                    .collect()
            }
            Smoothing::None => h.proportions.clone(),
        }
    }
}

/// `Σ φ(i) log₂(φ(i)/g(i))` (in bits) with the default Laplace smoothing.
pub fn kl_divergence(phi: &ScoreHistogram, g: &ScoreHistogram) -> Result<f64> {
    kl_divergence_with(phi, g, Smoothing::default())
}

pub fn kl_divergence_with(
    phi: &ScoreHistogram,
    g: &ScoreHistogram,
    smoothing: Smoothing,
) -> Result<f64> {
    if phi.bin_count != g.bin_count {
        return Err(Error::Dimension {
            expected: g.bin_count,
            got: phi.bin_count,
        });
    }
    let p = smoothing.apply(phi);
    let q = smoothing.apply(g);
    Ok(p.iter()
        .zip(&q)
        .map(|(&pi, &qi)| {
            if pi == 0.0 {
                0.0
            } else if qi == 0.0 {
                f64::INFINITY
            } else {
                pi * (pi / qi).log2()
            }
        })
        .sum())
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and
/// `target_cdf`, checking both one-sided limits at every sample point.
pub fn ks_distance(sample: &[f64], target_cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = target_cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
