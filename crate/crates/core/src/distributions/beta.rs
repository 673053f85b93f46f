use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};

/// Scores are clipped to `[CLIP_EPS, 1 - CLIP_EPS]` before fitting; tree
/// scores of exactly 0 or 1 make the Beta likelihood diverge.
pub const CLIP_EPS: f64 = 1e-6;

const MAX_ITER: usize = 200;
const GRAD_TOL: f64 = 1e-10;

/// Beta(α, β) reference distribution, typically fitted by maximum likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
    /// Total log-likelihood of the fitted sample (0 when constructed directly).
    pub log_likelihood: f64,
}

impl BetaPrior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Parameter(format!(
                "Beta shapes must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            log_likelihood: 0.0,
        })
    }

    fn dist(&self) -> Beta {
        Beta::new(self.alpha, self.beta).expect("validated shapes")
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        xlogy(self.alpha - 1.0, x) + xlogy(self.beta - 1.0, 1.0 - x) - ln_beta(self.alpha, self.beta)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.dist().cdf(x.clamp(0.0, 1.0))
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.dist().inverse_cdf(p.clamp(0.0, 1.0))
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Mean log-likelihood per observation given sufficient statistics
    /// `mean ln x` and `mean ln(1 - x)`.
    fn avg_log_likelihood(alpha: f64, beta: f64, mean_ln: f64, mean_ln1m: f64) -> f64 {
        (alpha - 1.0) * mean_ln + (beta - 1.0) * mean_ln1m - ln_beta(alpha, beta)
    }
}

/// `k * ln(y)` with the convention `0 * ln(0) = 0`.
pub(crate) fn xlogy(k: f64, y: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * y.ln()
    }
}

/// Trigamma function ψ₁(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + inv2 / 2.0
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))))
}

/// Method-of-moments shapes from a mean and (population) variance.
pub fn method_of_moments(mean: f64, variance: f64) -> Result<(f64, f64)> {
    if !(mean > 0.0 && mean < 1.0) {
        return Err(Error::Domain(format!("mean {mean} outside (0, 1)")));
    }
    if !(variance > 0.0) {
        return Err(Error::Degenerate(
            "zero variance: the Beta likelihood is unbounded".into(),
        ));
    }
    let common = mean * (1.0 - mean) / variance - 1.0;
    if common <= 0.0 {
        return Err(Error::Domain(format!(
            "variance {variance} too large for a Beta with mean {mean}"
        )));
    }
    Ok((mean * common, (1.0 - mean) * common))
}

/// Maximum-likelihood Beta fit by Newton's method on the score equations,
/// started from the method-of-moments estimate.
pub fn fit_beta_mle(scores: &[f64]) -> Result<BetaPrior> {
    if scores.len() < 10 {
        return Err(Error::Domain(format!(
            "Beta MLE needs at least 10 observations, got {}",
            scores.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Domain(format!("score {bad} outside [0, 1]")));
    }
    let first = scores[0];
    if scores.iter().all(|&s| s == first) {
        return Err(Error::Degenerate(
            "all scores are equal; the Beta MLE is unbounded".into(),
        ));
    }
    let n = scores.len() as f64;
    let clipped: Vec<f64> = scores
        .iter()
        .map(|s| s.clamp(CLIP_EPS, 1.0 - CLIP_EPS))
        .collect();
    let mean_ln = clipped.iter().map(|s| s.ln()).sum::<f64>() / n;
    let mean_ln1m = clipped.iter().map(|s| (1.0 - s).ln()).sum::<f64>() / n;
    if !(mean_ln.is_finite() && mean_ln1m.is_finite()) {
        return Err(Error::Numeric("non-finite log-likelihood after clipping".into()));
    }

    let m = clipped.iter().sum::<f64>() / n;
    let v = clipped.iter().map(|s| (s - m).powi(2)).sum::<f64>() / n;
    let (mut a, mut b) = method_of_moments(m, v).unwrap_or((1.0, 1.0));
    let mut ll = BetaPrior::avg_log_likelihood(a, b, mean_ln, mean_ln1m);

    for _ in 0..MAX_ITER {
        let dab = digamma(a + b);
        let g = [dab - digamma(a) + mean_ln, dab - digamma(b) + mean_ln1m];
        if g[0].hypot(g[1]) < GRAD_TOL {
            break;
        }
        let tab = trigamma(a + b);
        // Hessian of the mean log-likelihood, negative definite
        let h00 = tab - trigamma(a);
        let h11 = tab - trigamma(b);
        let h01 = tab;
        let det = h00 * h11 - h01 * h01;
        let mut step = [
            -(h11 * g[0] - h01 * g[1]) / det,
            -(-h01 * g[0] + h00 * g[1]) / det,
        ];
        let mut accepted = false;
        for _ in 0..60 {
            let (na, nb) = (a + step[0], b + step[1]);
            if na > 0.0 && nb > 0.0 {
                let nll = BetaPrior::avg_log_likelihood(na, nb, mean_ln, mean_ln1m);
                if nll >= ll {
                    a = na;
                    b = nb;
                    ll = nll;
                    accepted = true;
                    break;
                }
            }
            step = [step[0] / 2.0, step[1] / 2.0];
        }
        if !accepted {
            break;
        }
    }

    let log_likelihood = n * ll;
    if !log_likelihood.is_finite() {
        return Err(Error::Numeric("non-finite Beta log-likelihood".into()));
    }
    Ok(BetaPrior {
        alpha: a,
        beta: b,
        log_likelihood,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Beta as BetaDist, Distribution};

    #[test]
    fn moments_closed_form() {
        let (a, b) = method_of_moments(0.4, 0.04).unwrap();
        assert!((a - 2.0).abs() < 1e-12);
        assert!((b - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trigamma_reference_values() {
        // ψ₁(1) = π²/6, ψ₁(1/2) = π²/2
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((trigamma(1.0) - pi2 / 6.0).abs() < 1e-12);
        assert!((trigamma(0.5) - pi2 / 2.0).abs() < 1e-12);
        assert!((trigamma(30.0) - 0.033_895_060_357_739_9).abs() < 1e-12);
    }

    #[test]
    fn recovers_known_shapes() {
        let mut rng = crate::rng::stream(3, &[]);
        let d = BetaDist::new(2.0, 3.0).unwrap();
        let x: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let fit = fit_beta_mle(&x).unwrap();
        assert!((1.9..=2.1).contains(&fit.alpha), "{fit:?}");
        assert!((2.85..=3.15).contains(&fit.beta), "{fit:?}");
    }

    #[test]
    fn symmetric_sample_gives_equal_shapes() {
        let mut rng = crate::rng::stream(4, &[]);
        let d = BetaDist::new(1.7, 1.7).unwrap();
        let half: Vec<f64> = (0..50_000).map(|_| d.sample(&mut rng)).collect();
        let x: Vec<f64> = half.iter().flat_map(|&v| [v, 1.0 - v]).collect();
        let fit = fit_beta_mle(&x).unwrap();
        assert!((fit.alpha - fit.beta).abs() <= 0.05, "{fit:?}");
    }

    #[test]
    fn likelihood_improves_on_moments_start() {
        let mut rng = crate::rng::stream(5, &[]);
        let d = BetaDist::new(0.6, 4.0).unwrap();
        let x: Vec<f64> = (0..2_000).map(|_| d.sample(&mut rng)).collect();
        let fit = fit_beta_mle(&x).unwrap();
        let n = x.len() as f64;
        let c: Vec<f64> = x.iter().map(|s| s.clamp(CLIP_EPS, 1.0 - CLIP_EPS)).collect();
        let ml = c.iter().map(|s| s.ln()).sum::<f64>() / n;
        let ml1 = c.iter().map(|s| (1.0 - s).ln()).sum::<f64>() / n;
        let m = c.iter().sum::<f64>() / n;
        let v = c.iter().map(|s| (s - m).powi(2)).sum::<f64>() / n;
        let (a0, b0) = method_of_moments(m, v).unwrap();
        assert!(fit.log_likelihood >= n * BetaPrior::avg_log_likelihood(a0, b0, ml, ml1));
    }

    #[test]
    fn degenerate_sample_is_rejected() {
        assert!(matches!(fit_beta_mle(&[0.3; 20]), Err(Error::Degenerate(_))));
        assert!(fit_beta_mle(&[0.3; 5]).is_err());
    }

    #[test]
    fn clipped_extremes_still_fit() {
        let mut x = vec![0.0, 1.0, 0.0, 1.0];
        x.extend((1..20).map(|i| i as f64 / 20.0));
        let fit = fit_beta_mle(&x).unwrap();
        assert!(fit.alpha > 0.0 && fit.beta > 0.0 && fit.log_likelihood.is_finite());
    }

    #[test]
    fn pdf_cdf_consistent() {
        let b = BetaPrior::new(2.0, 3.0).unwrap();
        // Beta(2,3) pdf = 12 x (1-x)^2
        assert!((b.pdf(0.3) - 12.0 * 0.3 * 0.49).abs() < 1e-12);
        assert!((b.cdf(b.quantile(0.3)) - 0.3).abs() < 1e-8);
    }
}
