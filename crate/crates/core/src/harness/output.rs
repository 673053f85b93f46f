//! On-disk layout of study results.
//!
//! A simulation study directory holds `replications.csv`, `aggregate.csv`,
//! `deltas.csv`, `histograms/*.csv` and `manifest.json`; a real-data study
//! directory holds `selection.csv`, `deltas.csv`, `prior.json`,
//! `histograms/*.csv` and `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AggregateRow, DeltaRow, MeanSd, RealDataReport, StudyResult};
use crate::distributions::ScoreHistogram;
use crate::error::{Error, Result};
use crate::metrics::MetricTable;

pub const REPLICATIONS_HEADER: [&str; 12] = [
    "replication",
    "seed",
    "model",
    "selection",
    "hyperparameters",
    "leaves",
    "mse",
    "auc",
    "brier",
    "ici",
    "kl",
    "qr",
];

pub const AGGREGATE_HEADER: [&str; 17] = [
    "model",
    "selection",
    "reps",
    "leaves_mean",
    "leaves_sd",
    "mse_mean",
    "mse_sd",
    "auc_mean",
    "auc_sd",
    "brier_mean",
    "brier_sd",
    "ici_mean",
    "ici_sd",
    "kl_mean",
    "kl_sd",
    "qr_mean",
    "qr_sd",
];

/// `model,reps` then, for each of `auc_star`, `kl_star`, `delta`, the mean and
/// sd of AUC, Brier, ICI, KL and QR.
pub const DELTAS_HEADER: [&str; 32] = [
    "model",
    "reps",
    "auc_star_auc_mean",
    "auc_star_auc_sd",
    "auc_star_brier_mean",
    "auc_star_brier_sd",
    "auc_star_ici_mean",
    "auc_star_ici_sd",
    "auc_star_kl_mean",
    "auc_star_kl_sd",
    "auc_star_qr_mean",
    "auc_star_qr_sd",
    "kl_star_auc_mean",
    "kl_star_auc_sd",
    "kl_star_brier_mean",
    "kl_star_brier_sd",
    "kl_star_ici_mean",
    "kl_star_ici_sd",
    "kl_star_kl_mean",
    "kl_star_kl_sd",
    "kl_star_qr_mean",
    "kl_star_qr_sd",
    "delta_auc_mean",
    "delta_auc_sd",
    "delta_brier_mean",
    "delta_brier_sd",
    "delta_ici_mean",
    "delta_ici_sd",
    "delta_kl_mean",
    "delta_kl_sd",
    "delta_qr_mean",
    "delta_qr_sd",
];

pub const SELECTION_HEADER: [&str; 11] = [
    "learner",
    "selection",
    "split",
    "hyperparameters",
    "leaves",
    "mse",
    "auc",
    "brier",
    "ici",
    "kl",
    "qr",
];

const REAL_DELTAS_HEADER: [&str; 7] = ["learner", "split", "delta_auc", "delta_brier", "delta_ici", "delta_kl", "delta_qr"];

/// Provenance written next to every result set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub created: String,
    pub kind: String,
    pub master_seed: u64,
    #[serde(default)]
    pub replication_seeds: Vec<u64>,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new(kind: &str, master_seed: u64, replication_seeds: Vec<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: "scoreshape".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            created: chrono::Utc::now().to_rfc3339(),
            kind: kind.into(),
            master_seed,
            replication_seeds,
            config,
        }
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(fs::File::open(dir.join("manifest.json"))?)?)
    }

    fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// File-name form of a selection label: `AUC*` → `auc_star`.
pub fn selection_slug(selection: &str) -> String {
    selection.to_ascii_lowercase().replace('*', "_star")
}

pub fn histogram_file(model: &str, selection: &str) -> String {
    format!("{model}__{}.csv", selection_slug(selection))
}

fn prepare_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.join("manifest.json").exists() && !force {
        return Err(Error::Config(format!(
            "{} already holds results; pass --force to overwrite",
            dir.display()
        )));
    }
    fs::create_dir_all(dir.join("histograms"))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn mean_sd(v: Option<MeanSd>) -> [String; 2] {
    match v {
        Some(m) => [m.mean.to_string(), m.sd.to_string()],
        None => [String::new(), String::new()],
    }
}

fn write_histogram(dir: &Path, name: &str, h: &ScoreHistogram) -> Result<()> {
    h.write_csv(fs::File::create(dir.join("histograms").join(name))?)
}

pub fn write_study_outputs(dir: &Path, result: &StudyResult, force: bool) -> Result<()> {
    prepare_dir(dir, force)?;

    let mut w = csv::Writer::from_path(dir.join("replications.csv"))?;
    w.write_record(REPLICATIONS_HEADER)?;
    for r in &result.rows {
        let mut rec = vec![
            r.replication.to_string(),
            r.seed.to_string(),
            r.model.clone(),
            r.selection.clone(),
            r.hyperparameters.clone(),
            opt(r.leaves),
        ];
        rec.extend(r.test.csv_fields());
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("aggregate.csv"))?;
    w.write_record(AGGREGATE_HEADER)?;
    for a in super::aggregate(&result.rows) {
        w.write_record(aggregate_record(&a))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("deltas.csv"))?;
    w.write_record(DELTAS_HEADER)?;
    for d in super::delta_table(&result.rows) {
        w.write_record(delta_record(&d))?;
    }
    w.flush()?;

    for (model, selection, h) in &result.histograms {
        write_histogram(dir, &histogram_file(model, selection), h)?;
    }
    write_histogram(dir, "reference.csv", &result.reference)?;

    Manifest::new(
        "simulation",
        result.config.seed,
        result.replication_seeds.clone(),
        serde_json::to_value(&result.config)?,
    )
    .write(dir)
}

fn aggregate_record(a: &AggregateRow) -> Vec<String> {
    let mut rec = vec![a.model.clone(), a.selection.clone(), a.reps.to_string()];
    rec.extend(mean_sd(a.leaves));
    rec.extend(mean_sd(a.mse));
    for m in [a.auc, a.brier, a.ici, a.kl, a.qr] {
        rec.extend(mean_sd(Some(m)));
    }
    rec
}

fn delta_record(d: &DeltaRow) -> Vec<String> {
    let mut rec = vec![d.model.clone(), d.reps.to_string()];
    for m in d.auc_star.iter().chain(&d.kl_star).chain(&d.delta) {
        rec.extend(mean_sd(Some(*m)));
    }
    rec
}

pub fn write_real_data_outputs(
    dir: &Path,
    report: &RealDataReport,
    seed: u64,
    config: serde_json::Value,
    force: bool,
) -> Result<()> {
    prepare_dir(dir, force)?;

    let mut w = csv::Writer::from_path(dir.join("selection.csv"))?;
    w.write_record(SELECTION_HEADER)?;
    let mut record = |learner: &str, selection: &str, split: &str, hyper: String, leaves: Option<f64>, t: &MetricTable| {
        let mut rec = vec![learner.to_string(), selection.to_string(), split.to_string(), hyper, opt(leaves)];
        rec.extend(t.csv_fields());
        w.write_record(&rec)
    };
    record("glm", "fit", "test", String::new(), None, &report.glm_test)?;
    for r in &report.reports {
        for e in &r.entries {
            let name = r.learner.name();
            record(name, &e.selection, "validation", e.point.to_string(), e.leaves, &e.validation)?;
            record(name, &e.selection, "test", e.point.to_string(), e.leaves, &e.test)?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("deltas.csv"))?;
    w.write_record(REAL_DELTAS_HEADER)?;
    for r in &report.reports {
        for (split, d) in [("validation", r.validation_deltas), ("test", r.test_deltas)] {
            if let Some(d) = d {
                let mut rec = vec![r.learner.name().to_string(), split.to_string()];
                rec.extend([d.auc, d.brier, d.ici, d.kl, d.qr].map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;

    fs::write(
        dir.join("prior.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "alpha": report.prior.alpha,
            "beta": report.prior.beta,
            "glm_converged": report.glm_converged,
            "split_sizes": report.split_sizes,
        }))?,
    )?;

    for r in &report.reports {
        for e in &r.entries {
            let h = crate::distributions::histogram(&e.test_scores, report.reference.bin_count)?;
            write_histogram(dir, &histogram_file(r.learner.name(), &e.selection), &h)?;
        }
    }
    write_histogram(dir, "reference.csv", &report.reference)?;

    Manifest::new("real-data", seed, Vec::new(), config).write(dir)
}

/// Files a result directory must contain, by manifest kind.
pub fn expected_files(kind: &str) -> &'static [&'static str] {
    match kind {
        "real-data" => &["selection.csv", "deltas.csv", "prior.json", "histograms/reference.csv"],
        _ => &[
            "replications.csv",
            "aggregate.csv",
            "deltas.csv",
            "histograms/reference.csv",
        ],
    }
}

const TEXT_COLUMNS: [&str; 5] = ["model", "selection", "hyperparameters", "learner", "split"];

fn check_csv(path: &Path, header: &[&str]) -> Result<usize> {
    let mut r = csv::Reader::from_path(path)?;
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(Error::Schema {
            column: path.display().to_string(),
            reason: format!("header {got:?} does not match {header:?}"),
        });
    }
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        for (j, field) in rec.iter().enumerate() {
            // empty marks a missing value
            if TEXT_COLUMNS.contains(&header[j]) || field.is_empty() {
                continue;
            }
            field.parse::<f64>().map_err(|_| Error::Parse {
                row: i + 1,
                column: header[j].to_string(),
                reason: format!("`{field}` is not numeric"),
            })?;
        }
        rows += 1;
    }
    Ok(rows)
}

/// Check that a result directory is complete and every table matches its
/// documented header with numeric metric columns.
pub fn validate_study_outputs(dir: &Path) -> Result<Manifest> {
    if !dir.join("manifest.json").exists() {
        return Err(Error::MissingFiles(vec![dir.join("manifest.json")]));
    }
    let manifest = Manifest::read(dir)?;
    let missing: Vec<PathBuf> = expected_files(&manifest.kind)
        .iter()
        .map(|f| dir.join(f))
        .filter(|p| !p.exists())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }
    if manifest.kind == "real-data" {
        check_csv(&dir.join("selection.csv"), &SELECTION_HEADER)?;
        check_csv(&dir.join("deltas.csv"), &REAL_DELTAS_HEADER)?;
    } else {
        check_csv(&dir.join("replications.csv"), &REPLICATIONS_HEADER)?;
        check_csv(&dir.join("aggregate.csv"), &AGGREGATE_HEADER)?;
        check_csv(&dir.join("deltas.csv"), &DELTAS_HEADER)?;
    }
    for entry in fs::read_dir(dir.join("histograms"))? {
        check_csv(&entry?.path(), &["bin_lower", "bin_upper", "proportion"])?;
    }
    Ok(manifest)
}
