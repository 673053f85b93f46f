use serde::{Deserialize, Serialize};

use crate::distributions::quantile_sorted;
use crate::error::{Error, Result};

pub const LOESS_SPAN: f64 = 0.75;
/// At or above this many observations the smoother is evaluated on a grid.
pub const ICI_GRID_THRESHOLD: usize = 1000;
pub const ICI_GRID_POINTS: usize = 201;

/// Mean squared gap between scores and binary outcomes.
pub fn brier(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::Domain("Brier score of an empty sample".into()));
    }
    Ok(scores
        .iter()
        .zip(labels)
        .map(|(s, y)| (s - y).powi(2))
        .sum::<f64>()
        / scores.len() as f64)
}

/// Reliability curve on bins cut at empirical score quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub bin_centers: Vec<f64>,
    pub mean_observed: Vec<f64>,
    /// Average score inside each bin.
    pub mean_predicted: Vec<f64>,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Requested bin count.
    pub requested_bins: usize,
    /// True when tied quantiles merged bins or left some empty.
    pub merged: bool,
}

impl CalibrationCurve {
    pub fn bins(&self) -> usize {
        self.bin_centers.len()
    }

    pub fn max_deviation(&self) -> f64 {
        self.bin_centers
            .iter()
            .zip(&self.mean_observed)
            .map(|(c, m)| (c - m).abs())
            .fold(0.0, f64::max)
    }

    /// Largest gap between observed frequency and average score per bin.
    /// Unlike [`Self::max_deviation`] this is free of the offset that the
    /// range midpoint picks up in skewed tail bins.
    pub fn max_mean_deviation(&self) -> f64 {
        self.mean_predicted
            .iter()
            .zip(&self.mean_observed)
            .map(|(c, m)| (c - m).abs())
            .fold(0.0, f64::max)
    }
}

pub fn calibration_curve(scores: &[f64], labels: &[f64], bins: usize) -> Result<CalibrationCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if bins < 2 || scores.len() < bins {
        return Err(Error::Parameter(format!(
            "calibration curve needs n >= B >= 2 (n = {}, B = {bins})",
            scores.len()
        )));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = (0..=bins)
        .map(|k| quantile_sorted(&sorted, k as f64 / bins as f64))
        .collect();
    edges.dedup();
    let mut merged = edges.len() != bins + 1;
    if edges.len() == 1 {
        // all scores tied: one bin holding everything
        edges.push(edges[0]);
    }
    let nb = edges.len() - 1;
    let mut sums = vec![0.0; nb];
    let mut score_sums = vec![0.0; nb];
    let mut counts = vec![0usize; nb];
    for (&s, &y) in scores.iter().zip(labels) {
        // bins are [e_b, e_{b+1}), the last one closed
        let b = edges[1..nb].partition_point(|&e| e <= s);
        sums[b] += y;
        score_sums[b] += s;
        counts[b] += 1;
    }
    let mut bin_centers = Vec::with_capacity(nb);
    let mut mean_observed = Vec::with_capacity(nb);
    let mut mean_predicted = Vec::with_capacity(nb);
    let mut kept_counts = Vec::with_capacity(nb);
    for b in 0..nb {
        if counts[b] == 0 {
            merged = true;
            continue;
        }
        bin_centers.push((edges[b] + edges[b + 1]) / 2.0);
        mean_observed.push(sums[b] / counts[b] as f64);
        mean_predicted.push(score_sums[b] / counts[b] as f64);
        kept_counts.push(counts[b]);
    }
    Ok(CalibrationCurve {
        bin_centers,
        mean_observed,
        mean_predicted,
        bin_edges: edges,
        counts: kept_counts,
        requested_bins: bins,
        merged,
    })
}

/// Integrated calibration index and whether the degenerate branch was taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ici {
    pub value: f64,
    pub degenerate: bool,
}

/// Mean absolute gap between scores and a local-linear (tricube, span 0.75)
/// regression of the labels on the scores, clipped to `[0, 1]`.
pub fn ici(scores: &[f64], labels: &[f64]) -> Result<Ici> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let n = scores.len();
    if n < 20 {
        return Err(Error::Domain(format!("ICI needs at least 20 observations, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let xs: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| labels[i]).collect();

    let (lo, hi) = (xs[0], xs[n - 1]);
    if lo == hi {
        let mean = ys.iter().sum::<f64>() / n as f64;
        return Ok(Ici {
            value: (mean - lo).abs(),
            degenerate: true,
        });
    }

    let smoother = Loess::new(&xs, &ys, LOESS_SPAN);
    let total: f64 = if n >= ICI_GRID_THRESHOLD {
        let step = (hi - lo) / (ICI_GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..ICI_GRID_POINTS)
            .map(|k| if k + 1 == ICI_GRID_POINTS { hi } else { lo + k as f64 * step })
            .collect();
        let fitted = smoother.fit_sorted(&grid);
        xs.iter()
            .map(|&x| {
                let t = ((x - lo) / step).min((ICI_GRID_POINTS - 1) as f64);
                let k = (t.floor() as usize).min(ICI_GRID_POINTS - 2);
                let w = (x - grid[k]) / (grid[k + 1] - grid[k]);
                let g = fitted[k] * (1.0 - w) + fitted[k + 1] * w;
                (x - g.clamp(0.0, 1.0)).abs()
            })
            .sum()
    } else {
        let fitted = smoother.fit_sorted(&xs);
        xs.iter()
            .zip(&fitted)
            .map(|(&x, &g)| (x - g.clamp(0.0, 1.0)).abs())
            .sum()
    };
    Ok(Ici {
        value: total / n as f64,
        degenerate: false,
    })
}

/// Local linear regression with tricube weights over the `⌊span·n⌋` nearest
/// neighbours.
struct Loess<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    q: usize,
}

impl<'a> Loess<'a> {
    fn new(xs: &'a [f64], ys: &'a [f64], span: f64) -> Self {
        let n = xs.len();
        let q = ((span * n as f64).floor() as usize).clamp(2.min(n), n);
        Self { xs, ys, q }
    }

    /// Fitted values at ascending evaluation points.
    fn fit_sorted(&self, points: &[f64]) -> Vec<f64> {
        let (xs, n, q) = (self.xs, self.xs.len(), self.q);
        let mut start = 0;
        points
            .iter()
            .map(|&x0| {
                while start + q < n && xs[start + q] - x0 < x0 - xs[start] {
                    start += 1;
                }
                self.fit_at(x0, start)
            })
            .collect()
    }

    fn fit_at(&self, x0: f64, start: usize) -> f64 {
        let (xs, ys) = (self.xs, self.ys);
        let window = start..start + self.q;
        let h = (x0 - xs[start]).max(xs[start + self.q - 1] - x0);
        if h <= 0.0 {
            // every neighbour sits on x0, possibly with further ties outside the window
            let lo = xs.partition_point(|&x| x < x0);
            let hi = xs.partition_point(|&x| x <= x0);
            return ys[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        }
        let (mut sw, mut swu, mut swuu, mut swy, mut swuy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for j in window.clone() {
            let u = xs[j] - x0;
            let r = u.abs() / h;
            if r >= 1.0 {
                continue;
            }
            let t = 1.0 - r * r * r;
            let w = t * t * t;
            sw += w;
            swu += w * u;
            swuu += w * u * u;
            swy += w * ys[j];
            swuy += w * u * ys[j];
        }
        if sw <= 0.0 {
            return ys[window].iter().sum::<f64>() / self.q as f64;
        }
        let det = sw * swuu - swu * swu;
        if swuu == 0.0 || det <= 1e-12 * sw * swuu {
            return swy / sw;
        }
        (swy * swuu - swu * swuy) / det
    }
}
