use serde::{Deserialize, Serialize};

use super::{run_grid, Criterion, GridPoint, GridSearch, GridSpec, LearnerKind, ReferenceDistribution};
use crate::data::{split, Dataset};
use crate::distributions::{fit_beta_mle, BetaPrior, ScoreHistogram};
use crate::error::{Error, Result};
use crate::learners::fit_logistic;
use crate::metrics::{metric_table, MetricTable};
use crate::rng::derive_seed;

/// Metric differences `X(KL*) − X(AUC*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub auc: f64,
    pub brier: f64,
    pub ici: f64,
    pub kl: f64,
    pub qr: f64,
}

impl Deltas {
    pub fn between(kl_star: &MetricTable, auc_star: &MetricTable) -> Self {
        Self {
            auc: kl_star.auc - auc_star.auc,
            brier: kl_star.brier - auc_star.brier,
            ici: kl_star.ici - auc_star.ici,
            kl: kl_star.kl - auc_star.kl,
            qr: kl_star.qr - auc_star.qr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionEntry {
    /// Criterion label (`AUC*`, …) or `Smallest` / `Largest`.
    pub selection: String,
    pub candidate: usize,
    pub point: GridPoint,
    pub leaves: Option<f64>,
    pub validation: MetricTable,
    pub test: MetricTable,
    #[serde(skip)]
    pub test_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub learner: LearnerKind,
    pub entries: Vec<SelectionEntry>,
    /// Test-split deltas, present when both AUC* and KL* were selected.
    pub test_deltas: Option<Deltas>,
    pub validation_deltas: Option<Deltas>,
}

impl SelectionReport {
    /// Score `test` with every selected (and, for trees, extreme) model.
    pub fn from_search(search: &GridSearch, test: &Dataset, reference: &ReferenceDistribution) -> Result<Self> {
        let profile = reference.profile(test)?;
        let mut picks: Vec<(String, usize)> = Vec::new();
        if let Some((lo, hi)) = search.extremes {
            picks.push(("Smallest".into(), lo));
            picks.push(("Largest".into(), hi));
        }
        picks.extend(search.selected.iter().map(|(c, i)| (c.label().to_string(), *i)));

        let mut entries = Vec::with_capacity(picks.len());
        for (selection, i) in picks {
            let model = search
                .model(i)
                .ok_or_else(|| Error::Domain(format!("no fitted model kept for candidate {i}")))?;
            let scores = model.predict(test)?;
            let cand = &search.candidates[i];
            entries.push(SelectionEntry {
                selection,
                candidate: i,
                point: cand.point,
                leaves: cand.leaves,
                validation: cand.validation,
                test: metric_table(&scores, test.target(), &profile)?,
                test_scores: scores,
            });
        }
        let find = |label: &str| entries.iter().find(|e| e.selection == label);
        let (test_deltas, validation_deltas) = match (find(Criterion::Kl.label()), find(Criterion::Auc.label())) {
            (Some(k), Some(a)) => (
                Some(Deltas::between(&k.test, &a.test)),
                Some(Deltas::between(&k.validation, &a.validation)),
            ),
            _ => (None, None),
        };
        Ok(Self {
            learner: search.grid.learner(),
            entries,
            test_deltas,
            validation_deltas,
        })
    }

    pub fn entry(&self, selection: &str) -> Option<&SelectionEntry> {
        self.entries.iter().find(|e| e.selection == selection)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealDataConfig {
    pub grids: Vec<GridSpec>,
    #[serde(default = "default_ratios")]
    pub ratios: [f64; 3],
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
}

fn default_ratios() -> [f64; 3] {
    [0.64, 0.16, 0.20]
}

fn default_criteria() -> Vec<Criterion> {
    vec![Criterion::Auc, Criterion::Brier, Criterion::Ici, Criterion::Kl]
}

impl RealDataConfig {
    /// Forest and boosting grids sized for `n_features` columns.
    pub fn new(n_features: usize, seed: u64) -> Self {
        Self {
            grids: vec![GridSpec::default_forest(n_features), GridSpec::default_boost()],
            ratios: default_ratios(),
            seed,
            criteria: default_criteria(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealDataReport {
    pub prior: BetaPrior,
    pub glm_converged: bool,
    /// GLM test metrics against its own prior.
    pub glm_test: MetricTable,
    pub split_sizes: (usize, usize, usize),
    pub reference: ScoreHistogram,
    pub reports: Vec<SelectionReport>,
}

/// GLM → Beta prior by maximum likelihood on its training scores → grid
/// search with the prior as KL reference → AUC* vs KL* comparison on test.
pub fn real_data_study(dataset: &Dataset, config: &RealDataConfig) -> Result<RealDataReport> {
    let parts = split(dataset.n(), config.ratios, derive_seed(config.seed, &[1]))?;
    let (train, validation, test) = dataset.partition(&parts);

    let glm = fit_logistic(&train)?;
    if !glm.converged {
        log::warn!("prior GLM did not converge after {} iterations", glm.iterations);
    }
    let train_scores = glm.predict(&train)?;
    let prior = fit_beta_mle(&train_scores).map_err(|e| {
        Error::Degenerate(format!("Beta prior fit on GLM training scores failed: {e}"))
    })?;
    log::info!("prior Beta({:.4}, {:.4})", prior.alpha, prior.beta);
    let reference = ReferenceDistribution::BetaPrior(prior);
    let test_profile = reference.profile(&test)?;
    let glm_test = metric_table(&glm.predict(&test)?, test.target(), &test_profile)?;

    let mut reports = Vec::with_capacity(config.grids.len());
    for (g, grid) in config.grids.iter().enumerate() {
        let search = run_grid(
            &train,
            &validation,
            grid,
            &reference,
            &config.criteria,
            derive_seed(config.seed, &[2, g as u64]),
        )?;
        reports.push(SelectionReport::from_search(&search, &test, &reference)?);
    }
    Ok(RealDataReport {
        prior,
        glm_converged: glm.converged,
        glm_test,
        split_sizes: parts.sizes(),
        reference: test_profile.histogram,
        reports,
    })
}
