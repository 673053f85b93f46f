use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_grid, Criterion, GridSpec, LearnerKind, ReferenceDistribution, SelectionReport};
use crate::data::{split, Dataset};
use crate::dgp::{generate, resample_iterative, DgpId, DgpSpec, GeneratedSample, IterativeOptions};
use crate::distributions::{fit_beta_mle, histogram, ScoreHistogram, DEFAULT_BINS};
use crate::error::{Error, Result};
use crate::learners::fit_logistic;
use crate::metrics::{metric_table, MetricTable};
use crate::rng::derive_seed;

/// Declarative simulation-study settings (readable from TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub dgp: DgpId,
    #[serde(default)]
    pub n_noise: usize,
    /// Rows per split; each replication draws `3 · n`.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_learners")]
    pub learners: Vec<LearnerKind>,
    /// Per-learner grid overrides; learners without one use the defaults.
    #[serde(default)]
    pub grids: Vec<GridSpec>,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
    /// Also fit the logistic model as an unselected baseline.
    #[serde(default)]
    pub include_glm: bool,
    /// DGP4 only: rejection-resample toward a Beta fit of DGP1 probabilities.
    #[serde(default)]
    pub resample_toward_dgp1: bool,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// DGP4 coefficients of `x1²` and `x2·x3`.
    #[serde(default = "default_nonlinear")]
    pub nonlinear: [f64; 2],
}

fn default_n() -> usize {
    10_000
}
fn default_reps() -> usize {
    10
}
fn default_learners() -> Vec<LearnerKind> {
    vec![LearnerKind::Tree]
}
fn default_criteria() -> Vec<Criterion> {
    Criterion::ALL.to_vec()
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_nonlinear() -> [f64; 2] {
    [0.5, 0.5]
}

impl StudyConfig {
    pub fn new(dgp: DgpId, n_noise: usize, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            dgp,
            n_noise,
            n,
            reps,
            seed,
            learners: default_learners(),
            grids: Vec::new(),
            criteria: default_criteria(),
            include_glm: false,
            resample_toward_dgp1: false,
            epsilon: default_epsilon(),
            nonlinear: default_nonlinear(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Parameter("reps must be at least 1".into()));
        }
        if self.n < 10 {
            return Err(Error::Parameter(format!("n = {} per split is too small", self.n)));
        }
        if self.learners.is_empty() && !self.include_glm {
            return Err(Error::Parameter("no learners requested".into()));
        }
        if self.resample_toward_dgp1 && self.dgp != DgpId::Dgp4 {
            return Err(Error::Parameter("resampling toward DGP1 applies to DGP4 only".into()));
        }
        Ok(())
    }

    pub fn grid_for(&self, learner: LearnerKind, n_features: usize) -> GridSpec {
        self.grids
            .iter()
            .find(|g| g.learner() == learner)
            .cloned()
            .unwrap_or_else(|| match learner {
                LearnerKind::Tree => GridSpec::default_tree(),
                LearnerKind::Forest => GridSpec::default_forest(n_features),
                LearnerKind::Boost => GridSpec::default_boost(),
            })
    }

    fn dgp_spec(&self, seed: u64) -> DgpSpec {
        DgpSpec {
            nonlinear: self.nonlinear,
            ..DgpSpec::new(self.dgp, self.n_noise, seed)
        }
    }

    /// The `3 · n` rows of one replication.
    pub fn draw_sample(&self, replication_seed: u64) -> Result<GeneratedSample> {
        let total = 3 * self.n;
        if !self.resample_toward_dgp1 {
            return generate(&self.dgp_spec(derive_seed(replication_seed, &[10])), total);
        }
        let dgp1 = generate(&DgpSpec::new(DgpId::Dgp1, 0, derive_seed(replication_seed, &[13])), total)?;
        let target = fit_beta_mle(dgp1.true_prob())?;
        let mut pool = 4 * total;
        for attempt in 0..4u64 {
            let sample = generate(&self.dgp_spec(derive_seed(replication_seed, &[10, attempt])), pool)?;
            let opts = IterativeOptions::new(self.epsilon, derive_seed(replication_seed, &[14, attempt]));
            let out = resample_iterative(sample.true_prob(), &target, &opts)?;
            if out.kept.len() >= total {
                return Ok(sample.subset(&out.kept[..total]));
            }
            log::info!("resampling kept {} of {pool}; enlarging the pool", out.kept.len());
            pool *= 2;
        }
        Err(Error::Resample {
            reason: format!("could not collect {total} survivors"),
            best_ks: f64::NAN,
            survivors: 0,
        })
    }
}

/// Test metrics of one model in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub replication: usize,
    pub seed: u64,
    pub model: String,
    pub selection: String,
    pub hyperparameters: String,
    pub leaves: Option<f64>,
    pub test: MetricTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub replication_seeds: Vec<u64>,
    pub rows: Vec<ReplicationRow>,
    /// Test-score histograms of replication 0, keyed by (model, selection).
    pub histograms: Vec<(String, String, ScoreHistogram)>,
    /// Test-split true-probability histogram of replication 0.
    pub reference: ScoreHistogram,
}

struct ReplicationOutput {
    rows: Vec<ReplicationRow>,
    histograms: Vec<(String, String, ScoreHistogram)>,
    reference: ScoreHistogram,
}

fn run_replication(config: &StudyConfig, replication: usize, seed: u64) -> Result<ReplicationOutput> {
    let sample = config.draw_sample(seed)?;
    let parts = split(sample.dataset.n(), [1.0 / 3.0; 3], derive_seed(seed, &[11]))?;
    let (train, validation, test): (Dataset, Dataset, Dataset) = sample.dataset.partition(&parts);
    let reference = ReferenceDistribution::TrueProbabilities;
    let mut rows = Vec::new();
    let mut histograms = Vec::new();

    for (l, &learner) in config.learners.iter().enumerate() {
        let grid = config.grid_for(learner, train.n_features());
        let search = run_grid(
            &train,
            &validation,
            &grid,
            &reference,
            &config.criteria,
            derive_seed(seed, &[12, l as u64]),
        )?;
        let report = SelectionReport::from_search(&search, &test, &reference)?;
        for e in &report.entries {
            rows.push(ReplicationRow {
                replication,
                seed,
                model: learner.name().to_string(),
                selection: e.selection.clone(),
                hyperparameters: e.point.to_string(),
                leaves: e.leaves,
                test: e.test,
            });
            histograms.push((learner.name().to_string(), e.selection.clone(), histogram(&e.test_scores, DEFAULT_BINS)?));
        }
    }
    if config.include_glm {
        let glm = fit_logistic(&train)?;
        let scores = glm.predict(&test)?;
        rows.push(ReplicationRow {
            replication,
            seed,
            model: "glm".into(),
            selection: "fit".into(),
            hyperparameters: String::new(),
            leaves: None,
            test: metric_table(&scores, test.target(), &reference.profile(&test)?)?,
        });
        histograms.push(("glm".into(), "fit".into(), histogram(&scores, DEFAULT_BINS)?));
    }
    let reference = histogram(test.true_prob().expect("synthetic data"), DEFAULT_BINS)?;
    Ok(ReplicationOutput {
        rows,
        histograms,
        reference,
    })
}

/// Run `config.reps` independent replications. Replications run in
/// parallel; each derives every random stream from its own seed.
pub fn replicate(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.reps).map(|r| derive_seed(config.seed, &[r as u64])).collect();
    let outputs: Vec<ReplicationOutput> = seeds
        .par_iter()
        .enumerate()
        .map(|(r, &seed)| {
            log::info!("replication {r} (seed {seed})");
            run_replication(config, r, seed).map_err(|e| Error::Replication {
                replication: r,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut first = None;
    for (r, out) in outputs.into_iter().enumerate() {
        rows.extend(out.rows);
        if r == 0 {
            first = Some((out.histograms, out.reference));
        }
    }
    let (histograms, reference) = first.expect("at least one replication");
    Ok(StudyResult {
        config: config.clone(),
        replication_seeds: seeds,
        rows,
        histograms,
        reference,
    })
}

/// Mean and sample standard deviation (0 for a single value). Values are
/// summed in sorted order so results do not depend on replication order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
        dev.sort_by(f64::total_cmp);
        let sd = if v.len() > 1 {
            (dev.iter().sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub model: String,
    pub selection: String,
    pub reps: usize,
    pub leaves: Option<MeanSd>,
    pub mse: Option<MeanSd>,
    pub auc: MeanSd,
    pub brier: MeanSd,
    pub ici: MeanSd,
    pub kl: MeanSd,
    pub qr: MeanSd,
}

fn model_rank(model: &str) -> usize {
    ["tree", "forest", "boost", "glm"].iter().position(|m| *m == model).unwrap_or(usize::MAX)
}

fn selection_rank(selection: &str) -> usize {
    ["Smallest", "Largest", "MSE*", "AUC*", "Brier*", "ICI*", "KL*", "fit"]
        .iter()
        .position(|s| *s == selection)
        .unwrap_or(usize::MAX)
}

fn groups(rows: &[ReplicationRow]) -> Vec<(String, String, Vec<&ReplicationRow>)> {
    let mut keys: Vec<(String, String)> = rows.iter().map(|r| (r.model.clone(), r.selection.clone())).collect();
    keys.sort_by(|a, b| {
        (model_rank(&a.0), &a.0, selection_rank(&a.1), &a.1).cmp(&(model_rank(&b.0), &b.0, selection_rank(&b.1), &b.1))
    });
    keys.dedup();
    keys.into_iter()
        .map(|(m, s)| {
            let members = rows.iter().filter(|r| r.model == m && r.selection == s).collect();
            (m, s, members)
        })
        .collect()
}

/// Mean (sd) of every test metric per (model, selection).
pub fn aggregate(rows: &[ReplicationRow]) -> Vec<AggregateRow> {
    groups(rows)
        .into_iter()
        .map(|(model, selection, members)| {
            let col = |f: &dyn Fn(&ReplicationRow) -> f64| MeanSd::of(&members.iter().map(|r| f(r)).collect::<Vec<_>>());
            let opt = |f: &dyn Fn(&ReplicationRow) -> Option<f64>| {
                let v: Option<Vec<f64>> = members.iter().map(|r| f(r)).collect();
                v.map(|v| MeanSd::of(&v))
            };
            AggregateRow {
                model,
                selection,
                reps: members.len(),
                leaves: opt(&|r| r.leaves),
                mse: opt(&|r| r.test.mse_vs_truth),
                auc: col(&|r| r.test.auc),
                brier: col(&|r| r.test.brier),
                ici: col(&|r| r.test.ici),
                kl: col(&|r| r.test.kl),
                qr: col(&|r| r.test.qr),
            }
        })
        .collect()
}

/// AUC* and KL* test metrics with per-replication differences, Table-D1 layout.
/// Metric order in each array: AUC, Brier, ICI, KL, QR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub model: String,
    pub reps: usize,
    pub auc_star: [MeanSd; 5],
    pub kl_star: [MeanSd; 5],
    pub delta: [MeanSd; 5],
}

fn five(t: &MetricTable) -> [f64; 5] {
    [t.auc, t.brier, t.ici, t.kl, t.qr]
}

pub fn delta_table(rows: &[ReplicationRow]) -> Vec<DeltaRow> {
    let mut models: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    models.sort_by_key(|m| (model_rank(m), m.to_string()));
    models.dedup();
    let mut out = Vec::new();
    for model in models {
        let mut pairs: Vec<([f64; 5], [f64; 5])> = Vec::new();
        let mut reps: Vec<usize> = rows.iter().filter(|r| r.model == model).map(|r| r.replication).collect();
        reps.sort_unstable();
        reps.dedup();
        for rep in reps {
            let pick = |label: &str| {
                rows.iter()
                    .find(|r| r.model == model && r.replication == rep && r.selection == label)
            };
            if let (Some(a), Some(k)) = (pick("AUC*"), pick("KL*")) {
                pairs.push((five(&a.test), five(&k.test)));
            }
        }
        if pairs.is_empty() {
            continue;
        }
        let stat = |f: &dyn Fn(&([f64; 5], [f64; 5])) -> f64| MeanSd::of(&pairs.iter().map(f).collect::<Vec<_>>());
        let auc_star = std::array::from_fn(|j| stat(&|p| p.0[j]));
        let kl_star = std::array::from_fn(|j| stat(&|p| p.1[j]));
        let delta = std::array::from_fn(|j| stat(&|p| p.1[j] - p.0[j]));
        out.push(DeltaRow {
            model: model.to_string(),
            reps: pairs.len(),
            auc_star,
            kl_star,
            delta,
        });
    }
    out
}
