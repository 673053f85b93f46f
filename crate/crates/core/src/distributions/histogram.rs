use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 20;

/// Normalized histogram of values in `[0, 1]` on equal-width bins.
///
/// Bin `i` covers `[i/m, (i+1)/m)`; the last bin is closed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    pub bin_count: usize,
    pub counts: Vec<u64>,
    pub proportions: Vec<f64>,
    pub sample_size: u64,
}

pub(crate) fn bin_of(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

pub fn histogram(values: &[f64], bin_count: usize) -> Result<ScoreHistogram> {
    if bin_count == 0 {
        return Err(Error::Parameter("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::Domain("histogram of an empty sample".into()));
    }
    let mut counts = vec![0u64; bin_count];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("value {v} outside [0, 1]")));
        }
        counts[bin_of(v, bin_count)] += 1;
    }
    Ok(ScoreHistogram::from_counts(counts))
}

impl ScoreHistogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let n: u64 = counts.iter().sum();
        let proportions = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Self {
            bin_count: counts.len(),
            counts,
            proportions,
            sample_size: n,
        }
    }

    /// Histogram of the `n_points` quantiles `F⁻¹((k − 0.5)/n_points)` of a
    /// continuous distribution, counted directly from its CDF at the bin edges.
    pub fn from_quantile_grid(cdf: impl Fn(f64) -> f64, n_points: u64, bin_count: usize) -> Self {
        let below = |t: f64| -> u64 {
            // #{k in 1..=N : (k - 0.5)/N < t}
            let c = (n_points as f64 * t + 0.5).ceil() - 1.0;
            c.clamp(0.0, n_points as f64) as u64
        };
        let mut counts = Vec::with_capacity(bin_count);
        let mut prev = 0;
        for i in 0..bin_count {
            let upper = if i + 1 == bin_count {
                n_points
            } else {
                below(cdf((i + 1) as f64 / bin_count as f64))
            };
            counts.push(upper.saturating_sub(prev));
            prev = upper.max(prev);
        }
        Self::from_counts(counts)
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let m = self.bin_count as f64;
        (i as f64 / m, (i + 1) as f64 / m)
    }

    /// `bin_lower,bin_upper,proportion` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin_lower", "bin_upper", "proportion"])?;
        for (i, p) in self.proportions.iter().enumerate() {
            let (lo, hi) = self.bin_edges(i);
            w.write_record([lo.to_string(), hi.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read back proportions written by [`ScoreHistogram::write_csv`].
    pub fn read_csv_proportions<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64, f64)>> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for rec in r.deserialize::<(f64, f64, f64)>() {
            rows.push(rec?);
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn boundary_values() {
        let h = histogram(&[0.0, 0.5, 1.0], 2).unwrap();
        assert_eq!(h.counts, vec![1, 2]);
        assert!((h.proportions[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((h.proportions[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass() {
        let h = histogram(&vec![0.25; 1000], 20).unwrap();
        for (i, p) in h.proportions.iter().enumerate() {
            assert_eq!(*p, if i == 5 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn uniform_draws_fill_bins_evenly() {
        let mut rng = crate::rng::stream(11, &[]);
        let v: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let h = histogram(&v, 20).unwrap();
        for p in &h.proportions {
            assert!((p - 0.05).abs() < 0.01, "{p}");
        }
        assert!((h.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        assert!(matches!(histogram(&[0.2, 1.5], 20), Err(Error::Domain(_))));
        assert!(matches!(histogram(&[-0.1], 20), Err(Error::Domain(_))));
    }

    #[test]
    fn quantile_grid_matches_explicit_quantiles() {
        // Uniform CDF squared: F(t) = t^2, quantile u -> sqrt(u)
        let n = 10_000u64;
        let direct: Vec<f64> = (1..=n).map(|k| ((k as f64 - 0.5) / n as f64).sqrt()).collect();
        let expect = histogram(&direct, 20).unwrap();
        let got = ScoreHistogram::from_quantile_grid(|t| t * t, n, 20);
        let diff: i64 = expect
            .counts
            .iter()
            .zip(&got.counts)
            .map(|(a, b)| (*a as i64 - *b as i64).abs())
            .sum();
        // edges may differ by one point from floating rounding of sqrt
        assert!(diff <= 2, "{:?} vs {:?}", expect.counts, got.counts);
        assert_eq!(got.sample_size, n);
    }
}
