use crate::distributions::quantile_sorted;
use crate::error::{Error, Result};

/// q90 − q10 with type-7 quantiles.
pub fn interdecile_range(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.9) - quantile_sorted(&sorted, 0.1)
}

/// Ratio of the score interdecile range to the reference interdecile range.
pub fn quantile_ratio(scores: &[f64], reference: &[f64]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Domain("empty reference sample".into()));
    }
    quantile_ratio_to_spread(scores, interdecile_range(reference))
}

pub fn quantile_ratio_to_spread(scores: &[f64], reference_spread: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Domain("empty score sample".into()));
    }
    if !(reference_spread > 0.0) {
        return Err(Error::Degenerate(
            "reference q90 equals q10; quantile ratio undefined".into(),
        ));
    }
    Ok(interdecile_range(scores) / reference_spread)
}

/// Mean squared difference between scores and true probabilities.
pub fn mse_vs_truth(scores: &[f64], true_prob: Option<&[f64]>) -> Result<f64> {
    let truth = true_prob.ok_or_else(|| Error::Domain("true probabilities unavailable".into()))?;
    if truth.len() != scores.len() {
        return Err(Error::Dimension {
            expected: truth.len(),
            got: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::Domain("empty score sample".into()));
    }
    Ok(scores.iter().zip(truth).map(|(s, p)| (s - p).powi(2)).sum::<f64>() / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Vec<f64> {
        (0..101).map(|i| 0.3 + 0.4 * i as f64 / 100.0).collect()
    }

    #[test]
    fn identity_ratio() {
        let r = reference();
        assert!((quantile_ratio(&r, &r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_scores_have_zero_ratio() {
        assert_eq!(quantile_ratio(&[0.4; 30], &reference()).unwrap(), 0.0);
    }

    #[test]
    fn affine_widening_doubles_ratio() {
        let r = reference();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let wide: Vec<f64> = r.iter().map(|v| 2.0 * (v - mean) + mean).collect();
        assert!((quantile_ratio(&wide, &r).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_reference_spread() {
        assert!(quantile_ratio(&[0.1, 0.2], &[0.5; 10]).is_err());
    }

    #[test]
    fn mse_cases() {
        let p = [0.2, 0.5, 0.7];
        assert_eq!(mse_vs_truth(&p, Some(&p)).unwrap(), 0.0);
        let shifted: Vec<f64> = p.iter().map(|v| v + 0.1).collect();
        assert!((mse_vs_truth(&shifted, Some(&p)).unwrap() - 0.01).abs() < 1e-12);
        assert!(mse_vs_truth(&p, None).is_err());
    }
}
