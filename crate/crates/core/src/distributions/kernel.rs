use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};

/// Default bandwidth `n^(-2/5)`.
pub fn default_bandwidth(n: usize) -> f64 {
    (n as f64).powf(-0.4)
}

/// Boundary-respecting density estimate on `[0, 1]` built from Beta kernels.
///
/// At evaluation point `s` every observation `s_j` is weighted by the
/// Beta(`s/b + 1`, `(1 - s)/b + 1`) density, so the kernel shape adapts near
/// the boundaries and no mass leaks outside the unit interval.
#[derive(Debug, Clone)]
pub struct BetaKernelDensity {
    sample: Vec<f64>,
    bandwidth: f64,
    ln_s: Vec<f64>,
    ln_1ms: Vec<f64>,
}

impl BetaKernelDensity {
    pub fn new(sample: &[f64], bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Parameter(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if sample.is_empty() {
            return Err(Error::Domain("kernel density of an empty sample".into()));
        }
        if let Some(bad) = sample.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Domain(format!("sample value {bad} outside [0, 1]")));
        }
        Ok(Self {
            sample: sample.to_vec(),
            bandwidth,
            ln_s: sample.iter().map(|s| s.ln()).collect(),
            ln_1ms: sample.iter().map(|s| (1.0 - s).ln()).collect(),
        })
    }

    pub fn with_default_bandwidth(sample: &[f64]) -> Result<Self> {
        Self::new(sample, default_bandwidth(sample.len()))
    }

    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn evaluate(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("evaluation point {s} outside [0, 1]")));
        }
        Ok(self.eval(s))
    }

    fn eval(&self, s: f64) -> f64 {
        let k1 = s / self.bandwidth;
        let k2 = (1.0 - s) / self.bandwidth;
        let norm = ln_beta(k1 + 1.0, k2 + 1.0);
        let total: f64 = self
            .ln_s
            .iter()
            .zip(&self.ln_1ms)
            .map(|(&a, &b)| (xlogy_ln(k1, a) + xlogy_ln(k2, b) - norm).exp())
            .sum();
        total / self.sample.len() as f64
    }

    /// Tabulate the density on `points + 1` equally spaced nodes of `[0, 1]`.
    pub fn on_grid(&self, points: usize) -> GridDensity {
        let points = points.max(1);
        let xs: Vec<f64> = (0..=points).map(|i| i as f64 / points as f64).collect();
        let ys = xs.iter().map(|&x| self.eval(x)).collect();
        GridDensity { xs, ys }
    }
}

/// `k * l` where `l` is an already computed logarithm, with `0 * -inf = 0`.
fn xlogy_ln(k: f64, l: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * l
    }
}

/// Piecewise-linear tabulation of a density on an equally spaced grid.
#[derive(Debug, Clone)]
pub struct GridDensity {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridDensity {
    pub fn evaluate(&self, s: f64) -> f64 {
        let m = self.xs.len() - 1;
        if m == 0 {
            return self.ys[0];
        }
        let t = s.clamp(0.0, 1.0) * m as f64;
        let i = (t.floor() as usize).min(m - 1);
        let w = t - i as f64;
        self.ys[i] * (1.0 - w) + self.ys[i + 1] * w
    }
}
