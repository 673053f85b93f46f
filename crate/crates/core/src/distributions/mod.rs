//! Score histograms, divergences, the Beta distribution and Beta-kernel density
//! estimation on the unit interval.

mod beta;
mod divergence;
mod histogram;
mod kernel;

pub use beta::{fit_beta_mle, method_of_moments, trigamma, BetaPrior, CLIP_EPS};
pub use divergence::{kl_divergence, kl_divergence_with, ks_distance, Smoothing};
pub use histogram::{histogram, ScoreHistogram, DEFAULT_BINS};
pub use kernel::{default_bandwidth, BetaKernelDensity, GridDensity};

/// Type-7 (linear interpolation) sample quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Type-7 sample quantile.
pub fn quantile(values: &[f64], prob: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, prob)
}
