//! Rejection subsampling toward a target score density.
//!
//! Point `i` survives with probability `g(s_i) / (c · φ̂(s_i))`, where `φ̂` is
//! a Beta-kernel estimate of the current score density, so survivors follow
//! `g`. The one-shot variant needs a finite `c = sup g/φ̂`; the iterative
//! variant caps each step's probability at one and repeats until the
//! Kolmogorov–Smirnov distance to the target drops below `ε`.

use rand::Rng;

use crate::distributions::{ks_distance, BetaKernelDensity, BetaPrior};
use crate::error::{Error, Result};
use crate::rng::stream;

pub const DEFAULT_C_MAX: f64 = 1e3;
pub const DEFAULT_SURVIVOR_FLOOR: usize = 50;

const RESAMPLE_STREAM: u64 = 0x5e5a;
/// Above this many points the kernel estimate is tabulated and interpolated.
const DIRECT_KDE_LIMIT: usize = 2_000;
const KDE_GRID_POINTS: usize = 1_000;
/// Central-mass grid of the target on which `c` is also maximized.
const TARGET_GRID_POINTS: usize = 99;

pub trait TargetDistribution: Sync {
    fn pdf(&self, s: f64) -> f64;
    fn cdf(&self, s: f64) -> f64;

    /// Inverse CDF; the default bisects [`Self::cdf`].
    fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl TargetDistribution for BetaPrior {
    fn pdf(&self, s: f64) -> f64 {
        BetaPrior::pdf(self, s)
    }
    fn cdf(&self, s: f64) -> f64 {
        BetaPrior::cdf(self, s)
    }
    fn quantile(&self, p: f64) -> f64 {
        BetaPrior::quantile(self, p)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UniformTarget;

impl TargetDistribution for UniformTarget {
    fn pdf(&self, s: f64) -> f64 {
        if (0.0..=1.0).contains(&s) {
            1.0
        } else {
            0.0
        }
    }
    fn cdf(&self, s: f64) -> f64 {
        s.clamp(0.0, 1.0)
    }
    fn quantile(&self, p: f64) -> f64 {
        p.clamp(0.0, 1.0)
    }
}

/// Kernel estimate of the density of `scores`, tabulated for large samples.
fn estimate_density(scores: &[f64], bandwidth: Option<f64>) -> Result<Box<dyn Fn(f64) -> f64 + Sync>> {
    let kde = match bandwidth {
        Some(b) => BetaKernelDensity::new(scores, b)?,
        None => BetaKernelDensity::with_default_bandwidth(scores)?,
    };
    if scores.len() > DIRECT_KDE_LIMIT {
        let grid = kde.on_grid(KDE_GRID_POINTS);
        Ok(Box::new(move |s| grid.evaluate(s)))
    } else {
        Ok(Box::new(move |s| kde.evaluate(s.clamp(0.0, 1.0)).unwrap_or(0.0)))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RejectionOptions {
    pub c_max: f64,
    /// Kernel bandwidth; `None` uses `n^(-2/5)`.
    pub bandwidth: Option<f64>,
    pub seed: u64,
}

impl Default for RejectionOptions {
    fn default() -> Self {
        Self {
            c_max: DEFAULT_C_MAX,
            bandwidth: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RejectionOutcome {
    /// Surviving indices, ascending.
    pub kept: Vec<usize>,
    pub c: f64,
    /// Per-point acceptance probabilities `g / (c φ̂)`.
    pub acceptance: Vec<f64>,
    /// KS distance of the survivors to the target.
    pub ks: f64,
}

impl RejectionOutcome {
    pub fn kept_fraction(&self) -> f64 {
        self.kept.len() as f64 / self.acceptance.len() as f64
    }

    /// Mean and standard deviation of the number of survivors.
    pub fn expected_kept(&self) -> (f64, f64) {
        let mean = self.acceptance.iter().sum();
        let var: f64 = self.acceptance.iter().map(|p| p * (1.0 - p)).sum();
        (mean, var.sqrt())
    }
}

fn check_scores(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Domain("cannot resample an empty sample".into()));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Domain(format!("score {s} outside [0, 1]")));
    }
    Ok(())
}

/// One-shot rejection sampling (the "c small" algorithm).
pub fn resample_rejection(
    scores: &[f64],
    target: &dyn TargetDistribution,
    opts: &RejectionOptions,
) -> Result<RejectionOutcome> {
    check_scores(scores)?;
    let phi = estimate_density(scores, opts.bandwidth)?;
    resample_rejection_with_density(scores, &*phi, target, opts)
}

/// As [`resample_rejection`] with a caller-supplied current density.
pub fn resample_rejection_with_density(
    scores: &[f64],
    phi_hat: &(dyn Fn(f64) -> f64 + Sync),
    target: &dyn TargetDistribution,
    opts: &RejectionOptions,
) -> Result<RejectionOutcome> {
    check_scores(scores)?;
    let ratio = |s: f64| {
        let g = target.pdf(s);
        if g == 0.0 {
            0.0
        } else {
            g / phi_hat(s)
        }
    };
    let grid = (1..=TARGET_GRID_POINTS)
        .map(|k| target.quantile(0.005 + 0.99 * (k - 1) as f64 / (TARGET_GRID_POINTS - 1) as f64));
    let c = scores
        .iter()
        .copied()
        .chain(grid)
        .map(ratio)
        .fold(0.0, |a: f64, r| if r.is_nan() { f64::INFINITY } else { a.max(r) });
    if !(c.is_finite() && c <= opts.c_max) {
        return Err(Error::RejectionConstant { c, limit: opts.c_max });
    }
    if c == 0.0 {
        return Err(Error::Resample {
            reason: "target density is zero on every sample point".into(),
            best_ks: 1.0,
            survivors: 0,
        });
    }
    let mut rng = stream(opts.seed, &[RESAMPLE_STREAM]);
    let acceptance: Vec<f64> = scores.iter().map(|&s| (ratio(s) / c).min(1.0)).collect();
    let kept: Vec<usize> = acceptance
        .iter()
        .enumerate()
        .filter(|(_, &p)| rng.random::<f64>() < p)
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        return Err(Error::Resample {
            reason: format!("no point survived (c = {c:.3})"),
            best_ks: 1.0,
            survivors: 0,
        });
    }
    let survivors: Vec<f64> = kept.iter().map(|&i| scores[i]).collect();
    let ks = ks_distance(&survivors, |s| target.cdf(s));
    Ok(RejectionOutcome {
        kept,
        c,
        acceptance,
        ks,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct IterativeOptions {
    pub epsilon: f64,
    pub survivor_floor: usize,
    pub max_iterations: usize,
    pub bandwidth: Option<f64>,
    pub seed: u64,
}

impl IterativeOptions {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        Self {
            epsilon,
            survivor_floor: DEFAULT_SURVIVOR_FLOOR,
            max_iterations: 200,
            bandwidth: None,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterativeOutcome {
    /// Surviving indices, ascending.
    pub kept: Vec<usize>,
    /// KS distance to the target before each rejection pass and at exit.
    pub ks_trace: Vec<f64>,
    pub survivors_trace: Vec<usize>,
    pub iterations: usize,
}

/// Iterative rejection (the "c large" algorithm): each pass re-estimates the
/// density of the survivors and keeps point `i` with probability
/// `min(1, g(s_i)/φ̂(s_i))`.
pub fn resample_iterative(
    scores: &[f64],
    target: &dyn TargetDistribution,
    opts: &IterativeOptions,
) -> Result<IterativeOutcome> {
    check_scores(scores)?;
    if !(opts.epsilon > 0.0 && opts.epsilon <= 0.5) {
        return Err(Error::Parameter(format!("epsilon {} outside (0, 0.5]", opts.epsilon)));
    }
    let mut kept: Vec<usize> = (0..scores.len()).collect();
    let mut values: Vec<f64> = scores.to_vec();
    let mut ks_trace = Vec::new();
    let mut survivors_trace = Vec::new();
    let mut best_ks = f64::INFINITY;
    for iteration in 0.. {
        let d = ks_distance(&values, |s| target.cdf(s));
        ks_trace.push(d);
        survivors_trace.push(kept.len());
        best_ks = best_ks.min(d);
        if d <= opts.epsilon {
            return Ok(IterativeOutcome {
                kept,
                ks_trace,
                survivors_trace,
                iterations: iteration,
            });
        }
        if kept.len() < opts.survivor_floor {
            return Err(Error::Resample {
                reason: format!("survivors fell below the floor of {}", opts.survivor_floor),
                best_ks,
                survivors: kept.len(),
            });
        }
        if iteration >= opts.max_iterations {
            return Err(Error::Resample {
                reason: format!("no convergence after {} iterations", opts.max_iterations),
                best_ks,
                survivors: kept.len(),
            });
        }
        let phi = estimate_density(&values, opts.bandwidth)?;
        let mut rng = stream(opts.seed, &[RESAMPLE_STREAM, iteration as u64]);
        let mut next = Vec::with_capacity(kept.len());
        for &i in &kept {
            let s = scores[i];
            let f = phi(s);
            let p = if f > 0.0 { (target.pdf(s) / f).min(1.0) } else { 1.0 };
            if rng.random::<f64>() < p {
                next.push(i);
            }
        }
        kept = next;
        values = kept.iter().map(|&i| scores[i]).collect();
        if values.is_empty() {
            return Err(Error::Resample {
                reason: "every point was rejected".into(),
                best_ks,
                survivors: 0,
            });
        }
    }
    unreachable!()
}
