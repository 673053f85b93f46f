//! Markdown summaries and SVG score histograms derived from study outputs.
//!
//! Everything here reads the CSV/JSON files written by the harness; those
//! files stay the source of truth.

pub mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::distributions::ScoreHistogram;
use crate::error::{Error, Result};
use crate::harness::{expected_files, validate_study_outputs, Criterion, Manifest};

pub const REPORT_FILE: &str = "report.md";
pub const FIGURE_DIR: &str = "figures";

/// Files produced by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub markdown: PathBuf,
    pub figures: Vec<PathBuf>,
}

fn read_bins(path: &Path) -> Result<Vec<svg::Bin>> {
    ScoreHistogram::read_csv_proportions(fs::File::open(path)?)
}

/// `(model, criterion)` encoded in a histogram file name such as
/// `tree__kl_star.csv`; `None` for the reference and non-criterion picks.
fn parse_histogram_name(file: &str) -> Option<(String, Criterion)> {
    let stem = file.strip_suffix(".csv")?;
    let (model, slug) = stem.split_once("__")?;
    let criterion = Criterion::ALL
        .into_iter()
        .find(|c| crate::harness::selection_slug(c.label()) == slug)?;
    Some((model.to_string(), criterion))
}

/// Render `report.md` and one SVG per (model, criterion) histogram in `dir`.
pub fn write_report(dir: &Path) -> Result<ReportFiles> {
    if !dir.join("manifest.json").exists() {
        let mut missing = vec![dir.join("manifest.json")];
        missing.extend(expected_files("simulation").iter().map(|f| dir.join(f)));
        return Err(Error::MissingFiles(missing));
    }
    let manifest = validate_study_outputs(dir)?;
    let hist_dir = dir.join("histograms");
    let reference = read_bins(&hist_dir.join("reference.csv"))?;

    let mut names: Vec<String> = fs::read_dir(&hist_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let fig_dir = dir.join(FIGURE_DIR);
    fs::create_dir_all(&fig_dir)?;
    let mut figures = Vec::new();
    for name in names {
        let Some((model, criterion)) = parse_histogram_name(&name) else { continue };
        let bins = read_bins(&hist_dir.join(&name))?;
        let title = format!("{model} — {criterion} (test scores vs reference)");
        let path = fig_dir.join(name.replace(".csv", ".svg"));
        fs::write(&path, svg::histogram_svg(&title, &bins, &reference))?;
        figures.push(path);
    }

    let markdown = dir.join(REPORT_FILE);
    let body = if manifest.kind == "real-data" {
        real_data_markdown(dir, &manifest)?
    } else {
        simulation_markdown(dir, &manifest)?
    };
    let mut text = body;
    if !figures.is_empty() {
        text.push_str("\n## Score histograms\n\n");
        for f in &figures {
            let rel = f.strip_prefix(dir).unwrap_or(f);
            let _ = writeln!(text, "![{}]({})", f.file_stem().unwrap_or_default().to_string_lossy(), rel.display());
        }
    }
    fs::write(&markdown, text)?;
    Ok(ReportFiles { markdown, figures })
}

fn cell(mean: &str, sd: &str) -> String {
    match (mean.parse::<f64>(), sd.parse::<f64>()) {
        (Ok(m), Ok(s)) => format!("{m:.3} ({s:.3})"),
        (Ok(m), Err(_)) => format!("{m:.3}"),
        _ => String::new(),
    }
}

fn simulation_markdown(dir: &Path, manifest: &Manifest) -> Result<String> {
    let mut out = String::new();
    let config = &manifest.config;
    let _ = writeln!(out, "# Simulation study\n");
    let _ = writeln!(
        out,
        "DGP {}, {} noise columns, n = {} per split, {} replications, master seed {}.\n",
        config["dgp"].as_str().unwrap_or("?"),
        config["n_noise"],
        config["n"],
        config["reps"],
        manifest.master_seed
    );
    let _ = writeln!(out, "Test-set metrics, mean (sd) over replications.\n");
    let _ = writeln!(out, "| Model | Selection | Leaves | MSE | AUC | Brier | ICI | KL | QR |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|---|");
    let mut r = csv::Reader::from_path(dir.join("aggregate.csv"))?;
    for rec in r.records() {
        let rec = rec?;
        let pairs: Vec<String> = (3..17).step_by(2).map(|i| cell(&rec[i], &rec[i + 1])).collect();
        let _ = writeln!(out, "| {} | {} | {} |", &rec[0], &rec[1], pairs.join(" | "));
    }

    let mut r = csv::Reader::from_path(dir.join("deltas.csv"))?;
    let rows: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
    if !rows.is_empty() {
        let _ = writeln!(out, "\n## KL* versus AUC*\n");
        let _ = writeln!(
            out,
            "| Model | AUC* AUC | AUC* KL | KL* AUC | KL* KL | KL* QR | ΔAUC | ΔBrier | ΔICI | ΔKL | ΔQR |"
        );
        let _ = writeln!(out, "|---|---|---|---|---|---|---|---|---|---|---|");
        for rec in rows {
            let c = |i: usize| cell(&rec[i], &rec[i + 1]);
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                &rec[0],
                c(2),
                c(8),
                c(12),
                c(18),
                c(20),
                c(22),
                c(24),
                c(26),
                c(28),
                c(30)
            );
        }
    }
    Ok(out)
}

fn real_data_markdown(dir: &Path, manifest: &Manifest) -> Result<String> {
    let mut out = String::new();
    let prior: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("prior.json"))?)?;
    let _ = writeln!(out, "# Real-data study\n");
    let _ = writeln!(
        out,
        "Prior Beta({:.3}, {:.3}) fitted to GLM training scores; seed {}.\n",
        prior["alpha"].as_f64().unwrap_or(f64::NAN),
        prior["beta"].as_f64().unwrap_or(f64::NAN),
        manifest.master_seed
    );
    let _ = writeln!(out, "| Learner | Selection | Split | Hyperparameters | AUC | Brier | ICI | KL | QR |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|---|");
    let mut r = csv::Reader::from_path(dir.join("selection.csv"))?;
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<String> = (6..11).map(|i| cell(&rec[i], "")).collect();
        let _ = writeln!(out, "| {} | {} | {} | {} | {} |", &rec[0], &rec[1], &rec[2], &rec[3], v.join(" | "));
    }
    let _ = writeln!(out, "\n## KL* − AUC*\n");
    let _ = writeln!(out, "| Learner | Split | ΔAUC | ΔBrier | ΔICI | ΔKL | ΔQR |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|");
    let mut r = csv::Reader::from_path(dir.join("deltas.csv"))?;
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<String> = (2..7).map(|i| cell(&rec[i], "")).collect();
        let _ = writeln!(out, "| {} | {} | {} |", &rec[0], &rec[1], v.join(" | "));
    }
    Ok(out)
}
