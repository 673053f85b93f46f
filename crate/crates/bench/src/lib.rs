//! Shared fixtures for the benchmarks.

use scoreshape::data::Dataset;
use scoreshape::dgp::{generate, DgpId, DgpSpec};

/// A DGP1 sample with `n_noise` extra noise columns.
pub fn dgp1(n: usize, n_noise: usize, seed: u64) -> Dataset {
    generate(&DgpSpec::new(DgpId::Dgp1, n_noise, seed), n)
        .expect("fixture generation")
        .dataset
}

/// Scores and labels for metric benchmarks, taken from the true probabilities.
pub fn scored(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let ds = dgp1(n, 0, seed);
    (ds.true_prob().unwrap().to_vec(), ds.target().to_vec())
}
