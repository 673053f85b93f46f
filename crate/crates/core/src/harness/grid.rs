use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Criterion, ReferenceDistribution};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::{
    fit_boost_on, fit_forest_on, fit_tree_on, BoostParams, FittedModel, ForestParams, TrainingMatrix, TreeParams,
};
use crate::metrics::{metric_table, MetricTable};
use crate::rng::derive_seed;

const FOREST_STREAM: u64 = 0xF0;

/// `unique(round(2^seq(from, to, by)))`.
pub fn power_grid(from: f64, to: f64, by: f64) -> Vec<usize> {
    let steps = ((to - from) / by + 1e-9).floor() as usize;
    let mut out: Vec<usize> = (0..=steps)
        .map(|i| 2f64.powf(from + by * i as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum GridSpec {
    Tree {
        min_buckets: Vec<usize>,
    },
    Forest {
        mtry: Vec<usize>,
        min_buckets: Vec<usize>,
        #[serde(default = "default_trees")]
        n_trees: usize,
    },
    Boost {
        depths: Vec<usize>,
        max_rounds: usize,
        #[serde(default = "default_learning_rate")]
        learning_rate: f64,
    },
}

fn default_trees() -> usize {
    250
}

fn default_learning_rate() -> f64 {
    0.3
}

impl GridSpec {
    /// min_bucket ∈ round(2^(1, 1.1, …, 10)).
    pub fn default_tree() -> Self {
        GridSpec::Tree {
            min_buckets: power_grid(1.0, 10.0, 0.1),
        }
    }

    /// mtry ∈ {2, 4, 6} ∩ [1, p], min_bucket ∈ round(2^(1, 1.4, …, 13.8)), 250 trees.
    pub fn default_forest(n_features: usize) -> Self {
        let mut mtry: Vec<usize> = [2, 4, 6].into_iter().filter(|&m| m <= n_features).collect();
        if mtry.is_empty() {
            mtry.push(n_features.max(1));
        }
        GridSpec::Forest {
            mtry,
            min_buckets: power_grid(1.0, 14.0, 0.4),
            n_trees: default_trees(),
        }
    }

    /// Depth ∈ {2, 4, 6}, rounds 1..=400.
    pub fn default_boost() -> Self {
        GridSpec::Boost {
            depths: vec![2, 4, 6],
            max_rounds: 400,
            learning_rate: default_learning_rate(),
        }
    }

    pub fn learner(&self) -> LearnerKind {
        match self {
            GridSpec::Tree { .. } => LearnerKind::Tree,
            GridSpec::Forest { .. } => LearnerKind::Forest,
            GridSpec::Boost { .. } => LearnerKind::Boost,
        }
    }

    /// Grid points in declaration order (the tie-break order).
    pub fn points(&self) -> Vec<GridPoint> {
        match self {
            GridSpec::Tree { min_buckets } => min_buckets
                .iter()
                .map(|&b| GridPoint::Tree { min_bucket: b })
                .collect(),
            GridSpec::Forest { mtry, min_buckets, .. } => mtry
                .iter()
                .flat_map(|&m| min_buckets.iter().map(move |&b| GridPoint::Forest { mtry: m, min_bucket: b }))
                .collect(),
            GridSpec::Boost { depths, max_rounds, .. } => depths
                .iter()
                .flat_map(|&d| (1..=*max_rounds).map(move |r| GridPoint::Boost { max_depth: d, rounds: r }))
                .collect(),
        }
    }

    fn validate(&self, n_features: usize) -> Result<()> {
        let empty = match self {
            GridSpec::Tree { min_buckets } => min_buckets.is_empty(),
            GridSpec::Forest { mtry, min_buckets, n_trees } => {
                if let Some(&m) = mtry.iter().find(|&&m| m == 0 || m > n_features) {
                    return Err(Error::Parameter(format!("mtry {m} outside 1..={n_features}")));
                }
                mtry.is_empty() || min_buckets.is_empty() || *n_trees == 0
            }
            GridSpec::Boost { depths, max_rounds, .. } => depths.is_empty() || *max_rounds == 0,
        };
        if empty {
            return Err(Error::Parameter("empty hyperparameter grid".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Tree,
    Forest,
    Boost,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Tree => "tree",
            LearnerKind::Forest => "forest",
            LearnerKind::Boost => "boost",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum GridPoint {
    Tree { min_bucket: usize },
    Forest { mtry: usize, min_bucket: usize },
    Boost { max_depth: usize, rounds: usize },
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridPoint::Tree { min_bucket } => write!(f, "min_bucket={min_bucket}"),
            GridPoint::Forest { mtry, min_bucket } => write!(f, "mtry={mtry};min_bucket={min_bucket}"),
            GridPoint::Boost { max_depth, rounds } => write!(f, "max_depth={max_depth};rounds={rounds}"),
        }
    }
}

/// One fitted grid point and its validation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub point: GridPoint,
    pub validation: MetricTable,
    /// Leaves of the tree, or mean leaves per tree for a forest.
    pub leaves: Option<f64>,
}

/// Outcome of a grid search: every candidate's validation metrics, the index
/// chosen by each criterion, and the fitted models needed downstream.
#[derive(Debug, Clone)]
pub struct GridSearch {
    pub grid: GridSpec,
    pub candidates: Vec<Candidate>,
    pub selected: Vec<(Criterion, usize)>,
    /// Fewest- and most-leaved candidates (tree grids only).
    pub extremes: Option<(usize, usize)>,
    models: BTreeMap<usize, FittedModel>,
}

impl GridSearch {
    pub fn selection(&self, criterion: Criterion) -> Option<usize> {
        self.selected.iter().find(|(c, _)| *c == criterion).map(|&(_, i)| i)
    }

    pub fn model(&self, candidate: usize) -> Option<&FittedModel> {
        self.models.get(&candidate)
    }
}

fn metric_of(table: &MetricTable, criterion: Criterion) -> Option<f64> {
    match criterion {
        Criterion::Mse => table.mse_vs_truth,
        Criterion::Auc => Some(table.auc),
        Criterion::Brier => Some(table.brier),
        Criterion::Ici => Some(table.ici),
        Criterion::Kl => Some(table.kl),
    }
}

/// Index of the best candidate under `criterion`; the first one wins ties.
pub fn select(candidates: &[Candidate], criterion: Criterion) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let Some(v) = metric_of(&c.validation, criterion) else { continue };
        if v.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, b)) if criterion.maximize() => v > b,
            Some((_, b)) => v < b,
        };
        if better {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Fit every grid point on `train`, score `validation`, and pick one
/// candidate per criterion.
pub fn run_grid(
    train: &Dataset,
    validation: &Dataset,
    grid: &GridSpec,
    reference: &ReferenceDistribution,
    criteria: &[Criterion],
    seed: u64,
) -> Result<GridSearch> {
    if train.n_features() != validation.n_features() {
        return Err(Error::Dimension {
            expected: train.n_features(),
            got: validation.n_features(),
        });
    }
    grid.validate(train.n_features())?;
    let profile = reference.profile(validation)?;
    let matrix = TrainingMatrix::new(train);
    let y = train.target();
    let labels = validation.target();
    let points = grid.points();
    let mut candidates = Vec::with_capacity(points.len());
    let mut kept: BTreeMap<usize, FittedModel> = BTreeMap::new();

    match grid {
        GridSpec::Tree { .. } => {
            for (i, point) in points.iter().enumerate() {
                let GridPoint::Tree { min_bucket } = *point else { unreachable!() };
                let params = TreeParams::with_min_bucket(min_bucket);
                let tree = fit_tree_on(&matrix, y, &params)?;
                let scores = tree.predict(validation)?;
                candidates.push(Candidate {
                    point: *point,
                    validation: metric_table(&scores, labels, &profile)?,
                    leaves: Some(tree.leaf_count() as f64),
                });
                kept.insert(i, FittedModel::Tree { params, tree });
            }
        }
        GridSpec::Forest { n_trees, .. } => {
            for (i, point) in points.iter().enumerate() {
                let forest = fit_forest_on(&matrix, y, &forest_params(point, *n_trees, seed, i))?;
                let scores = forest.predict(validation)?;
                let leaves =
                    forest.trees.iter().map(|t| t.leaf_count() as f64).sum::<f64>() / forest.trees.len() as f64;
                candidates.push(Candidate {
                    point: *point,
                    validation: metric_table(&scores, labels, &profile)?,
                    leaves: Some(leaves),
                });
                log::debug!("forest {point}: validation {:?}", candidates[i].validation);
            }
        }
        GridSpec::Boost {
            depths,
            max_rounds,
            learning_rate,
        } => {
            for &depth in depths {
                let params = BoostParams {
                    learning_rate: *learning_rate,
                    max_depth: depth,
                    n_rounds: *max_rounds,
                    seed,
                };
                let model = fit_boost_on(&matrix, y, &params)?;
                for (rounds, scores) in model.staged(validation)? {
                    candidates.push(Candidate {
                        point: GridPoint::Boost {
                            max_depth: depth,
                            rounds,
                        },
                        validation: metric_table(&scores, labels, &profile)?,
                        leaves: None,
                    });
                }
                // the model is stored once per depth; round-specific views are made below
                kept.insert(candidates.len() - 1, FittedModel::Boost { model, rounds: *max_rounds });
            }
        }
    }

    let mut selected = Vec::new();
    for &criterion in criteria {
        if criterion == Criterion::Mse && profile.truth.is_none() {
            log::warn!("MSE* skipped: no true probabilities available");
            continue;
        }
        if let Some(i) = select(&candidates, criterion) {
            selected.push((criterion, i));
        }
    }
    let extremes = match grid {
        GridSpec::Tree { .. } => {
            let leaves = |i: usize| candidates[i].leaves.unwrap_or(0.0);
            let mut lo = 0;
            let mut hi = 0;
            for i in 1..candidates.len() {
                if leaves(i) < leaves(lo) {
                    lo = i;
                }
                if leaves(i) > leaves(hi) {
                    hi = i;
                }
            }
            Some((lo, hi))
        }
        _ => None,
    };

    let mut needed: Vec<usize> = selected.iter().map(|&(_, i)| i).collect();
    if let Some((lo, hi)) = extremes {
        needed.extend([lo, hi]);
    }
    needed.sort_unstable();
    needed.dedup();
    let mut models = BTreeMap::new();
    for i in needed {
        let model = match (grid, &points[i]) {
            (GridSpec::Tree { .. }, _) => kept[&i].clone(),
            (GridSpec::Forest { n_trees, .. }, point) => {
                // deterministic refit: same per-point seed as during the search
                FittedModel::Forest(fit_forest_on(&matrix, y, &forest_params(point, *n_trees, seed, i))?)
            }
            (GridSpec::Boost { .. }, GridPoint::Boost { rounds, .. }) => {
                let full = kept.range(i..).next().map(|(_, m)| m).expect("boost model per depth");
                let FittedModel::Boost { model, .. } = full else { unreachable!() };
                FittedModel::Boost {
                    model: model.clone(),
                    rounds: *rounds,
                }
            }
            _ => unreachable!(),
        };
        models.insert(i, model);
    }

    Ok(GridSearch {
        grid: grid.clone(),
        candidates,
        selected,
        extremes,
        models,
    })
}

fn forest_params(point: &GridPoint, n_trees: usize, seed: u64, index: usize) -> ForestParams {
    let GridPoint::Forest { mtry, min_bucket } = *point else { unreachable!() };
    ForestParams {
        n_trees,
        mtry,
        min_bucket,
        bootstrap: true,
        seed: derive_seed(seed, &[FOREST_STREAM, index as u64]),
    }
}
