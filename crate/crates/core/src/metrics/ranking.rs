use crate::error::{Error, Result};

/// Area under the ROC curve as the Mann-Whitney statistic
/// `P(s⁺ > s⁻) + ½ P(s⁺ = s⁻)`, from a single sort with mid-ranks for ties.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Degenerate("AUC is undefined with a single class".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their average
        let mid_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_tie = order[i..j].iter().filter(|&&k| labels[k] == 1.0).count();
        rank_sum_pos += mid_rank * pos_in_tie as f64;
        i = j;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[1.0, 1.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn all_ties() {
        assert_eq!(auc(&[0.3; 6], &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn pair_enumeration() {
        let s = [0.1, 0.4, 0.35, 0.8];
        let y = [0.0, 0.0, 1.0, 1.0];
        // pairs (+,-): (0.35,0.1) win, (0.35,0.4) loss, (0.8,0.1) win, (0.8,0.4) win
        assert!((auc(&s, &y).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(auc(&[0.1, 0.2], &[1.0, 1.0]).is_err());
    }
}
