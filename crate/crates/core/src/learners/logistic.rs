use serde::{Deserialize, Serialize};

use super::tree::check_width;
use crate::data::{Dataset, FeatureOrigin};
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 50;
pub const SCORE_TOLERANCE: f64 = 1e-8;
/// Coefficient magnitude taken as a sign of (quasi-)complete separation.
pub const SEPARATION_LIMIT: f64 = 30.0;

/// Columns of a dataset entering the GLM design: every numeric feature and
/// all but the first indicator of each categorical variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub columns: Vec<usize>,
    pub names: Vec<String>,
    pub n_features: usize,
}

impl Design {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let mut columns = Vec::new();
        let mut names = Vec::new();
        let mut seen: Vec<&str> = Vec::new();
        for (j, c) in ds.columns().iter().enumerate() {
            if let FeatureOrigin::Indicator { variable, .. } = &c.origin {
                if !seen.contains(&variable.as_str()) {
                    seen.push(variable);
                    continue;
                }
            }
            columns.push(j);
            names.push(c.name.clone());
        }
        Self {
            columns,
            names,
            n_features: ds.n_features(),
        }
    }

    /// Number of coefficients including the intercept.
    pub fn width(&self) -> usize {
        self.columns.len() + 1
    }

    /// Design row `[1, x_j...]`.
    pub fn expand(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        out.extend(self.columns.iter().map(|&j| row[j]));
    }

    fn matrix(&self, ds: &Dataset) -> Vec<Vec<f64>> {
        let mut buf = Vec::new();
        ds.rows()
            .map(|r| {
                self.expand(r, &mut buf);
                buf.clone()
            })
            .collect()
    }

    fn name(&self, k: usize) -> &str {
        if k == 0 {
            "(intercept)"
        } else {
            &self.names[k - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub design: Design,
}

impl LogisticModel {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .design
                .columns
                .iter()
                .zip(&self.coefficients)
                .map(|(&j, b)| b * row[j])
                .sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(row))
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        check_width(self.design.n_features, ds)?;
        Ok(ds.rows().map(|r| self.predict_row(r)).collect())
    }

    /// `[intercept, coefficients...]`.
    pub fn beta(&self) -> Vec<f64> {
        let mut b = vec![self.intercept];
        b.extend_from_slice(&self.coefficients);
        b
    }
}

#[inline]
pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bernoulli log-likelihood `Σ y·η − ln(1 + e^η)` over design rows `x`.
pub fn log_likelihood(x: &[Vec<f64>], y: &[f64], beta: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(row, &yi)| {
            let eta = dot(row, beta);
            yi * eta - softplus(eta)
        })
        .sum()
}

/// Score vector `Xᵀ(y − p)`.
pub fn gradient(x: &[Vec<f64>], y: &[f64], beta: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; beta.len()];
    for (row, &yi) in x.iter().zip(y) {
        let r = yi - sigmoid(dot(row, beta));
        for (gk, xk) in g.iter_mut().zip(row) {
            *gk += r * xk;
        }
    }
    g
}

/// Largest relative gap between the analytic gradient and central finite
/// differences of [`log_likelihood`] at `beta`.
pub fn gradient_check(x: &[Vec<f64>], y: &[f64], beta: &[f64]) -> f64 {
    let analytic = gradient(x, y, beta);
    let mut worst: f64 = 0.0;
    let mut b = beta.to_vec();
    for k in 0..beta.len() {
        let h = 1e-5 * beta[k].abs().max(1.0);
        b[k] = beta[k] + h;
        let up = log_likelihood(x, y, &b);
        b[k] = beta[k] - h;
        let down = log_likelihood(x, y, &b);
        b[k] = beta[k];
        let numeric = (up - down) / (2.0 * h);
        let gap = (numeric - analytic[k]).abs() / analytic[k].abs().max(numeric.abs()).max(1.0);
        worst = worst.max(gap);
    }
    worst
}

/// In-place Cholesky factor (lower triangle) of a symmetric matrix.
/// Returns the first pivot that is not safely positive.
fn cholesky(a: &mut [Vec<f64>]) -> std::result::Result<(), usize> {
    let k = a.len();
    for j in 0..k {
        let diag_scale = a[j][j].abs();
        let mut d = a[j][j];
        for m in 0..j {
            d -= a[j][m] * a[j][m];
        }
        if !(d > 1e-10 * diag_scale.max(f64::MIN_POSITIVE)) {
            return Err(j);
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..k {
            let mut s = a[i][j];
            for m in 0..j {
                s -= a[i][m] * a[j][m];
            }
            a[i][j] = s / d;
        }
    }
    Ok(())
}

fn cholesky_solve(l: &[Vec<f64>], b: &mut [f64]) {
    let k = l.len();
    for i in 0..k {
        let s = b[i] - (0..i).map(|m| l[i][m] * b[m]).sum::<f64>();
        b[i] = s / l[i][i];
    }
    for i in (0..k).rev() {
        let s = b[i] - (i + 1..k).map(|m| l[m][i] * b[m]).sum::<f64>();
        b[i] = s / l[i][i];
    }
}

/// Weighted cross-product `Σ w_i x_i x_iᵀ`.
fn cross_product(x: &[Vec<f64>], w: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
    let k = x.first().map_or(0, Vec::len);
    let mut a = vec![vec![0.0; k]; k];
    for (i, row) in x.iter().enumerate() {
        let wi = w(i);
        for r in 0..k {
            let v = wi * row[r];
            for c in 0..=r {
                a[r][c] += v * row[c];
            }
        }
    }
    for r in 0..k {
        for c in r + 1..k {
            a[r][c] = a[c][r];
        }
    }
    a
}

/// Maximum-likelihood logistic regression by Newton–Raphson (IRLS).
pub fn fit_logistic(train: &Dataset) -> Result<LogisticModel> {
    let design = Design::from_dataset(train);
    let x = design.matrix(train);
    let y = train.target();
    let k = design.width();
    if train.n() <= k {
        return Err(Error::Domain(format!(
            "need more rows ({}) than coefficients ({k})",
            train.n()
        )));
    }
    let mut gram = cross_product(&x, |_| 1.0);
    if let Err(j) = cholesky(&mut gram) {
        return Err(Error::RankDeficient {
            column: design.name(j).to_string(),
        });
    }

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut beta = vec![0.0; k];
    beta[0] = if mean > 0.0 && mean < 1.0 {
        (mean / (1.0 - mean)).ln()
    } else {
        0.0
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut ll = log_likelihood(&x, y, &beta);
    while iterations < MAX_ITERATIONS {
        let g = gradient(&x, y, &beta);
        if g.iter().all(|v| v.abs() < SCORE_TOLERANCE) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut info = cross_product(&x, |i| {
            let p = sigmoid(dot(&x[i], &beta));
            p * (1.0 - p)
        });
        if cholesky(&mut info).is_err() {
            break;
        }
        let mut step = g;
        cholesky_solve(&info, &mut step);
        // halve until the likelihood does not decrease
        let mut t = 1.0;
        let mut next: Vec<f64>;
        loop {
            next = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let cand = log_likelihood(&x, y, &next);
            if cand >= ll - 1e-12 * ll.abs() || t < 1e-8 {
                ll = cand;
                break;
            }
            t *= 0.5;
        }
        beta = next;
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric("IRLS produced non-finite coefficients".into()));
        }
        if beta.iter().any(|b| b.abs() > SEPARATION_LIMIT) {
            log::warn!("coefficient exceeded {SEPARATION_LIMIT}; data look separable");
            break;
        }
    }
    Ok(LogisticModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        converged,
        iterations,
        design,
    })
}

/// Design rows of `ds` under `model`'s encoding, for diagnostics.
pub fn design_rows(model: &LogisticModel, ds: &Dataset) -> Vec<Vec<f64>> {
    model.design.matrix(ds)
}
