use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

const SPLIT_STREAM: u64 = 0x5350_4c49_54;

/// Disjoint train/validation/test index lists covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl SplitIndices {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

/// Part sizes by largest-remainder rounding; ties go to the earlier part.
pub(crate) fn part_sizes(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, e) in sizes.iter_mut().zip(&exact) {
        *s = e.floor() as usize;
    }
    let assigned: usize = sizes.iter().sum();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        sizes[k] += 1;
    }
    sizes
}

/// Seeded random permutation of `0..n` cut into three contiguous parts.
pub fn split(n: usize, ratios: [f64; 3], seed: u64) -> Result<SplitIndices> {
    if ratios.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Parameter(format!("split ratios must be positive: {ratios:?}")));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("split ratios sum to {total}, expected 1")));
    }
    if n < 3 {
        return Err(Error::Parameter(format!(
            "cannot split {n} observations into three nonempty parts"
        )));
    }
    let sizes = part_sizes(n, ratios);
    if sizes.contains(&0) {
        return Err(Error::Parameter(format!(
            "ratios {ratios:?} leave an empty part for n = {n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, &[SPLIT_STREAM]));
    let test = perm.split_off(sizes[0] + sizes[1]);
    let validation = perm.split_off(sizes[0]);
    Ok(SplitIndices {
        train: perm,
        validation,
        test,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_remainder_sizes() {
        let s = split(10, [0.64, 0.16, 0.20], 1).unwrap();
        assert_eq!(s.sizes(), (6, 2, 2));
    }

    #[test]
    fn thirds_of_thirty_thousand() {
        let third = 1.0 / 3.0;
        let s = split(30_000, [third, third, third], 5).unwrap();
        assert_eq!(s.sizes(), (10_000, 10_000, 10_000));
    }

    #[test]
    fn deterministic_partition() {
        let a = split(101, [0.5, 0.25, 0.25], 9).unwrap();
        let b = split(101, [0.5, 0.25, 0.25], 9).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.train.iter().chain(&a.validation).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(split(2, [0.4, 0.3, 0.3], 0).is_err());
        assert!(split(10, [0.5, 0.5, 0.5], 0).is_err());
        assert!(split(10, [1.0, 0.0, 0.0], 0).is_err());
    }
}
