use std::fs;
use std::path::Path;

use scoreshape::dgp::DgpId;
use scoreshape::distributions::ScoreHistogram;
use scoreshape::harness::*;
use scoreshape::report::{svg, write_report};
use scoreshape::Error;

fn study(dir: &Path, criteria: Vec<Criterion>) {
    let mut cfg = StudyConfig::new(DgpId::Dgp1, 0, 300, 2, 17);
    cfg.grids = vec![GridSpec::Tree {
        min_buckets: vec![2, 10, 40],
    }];
    cfg.criteria = criteria;
    let result = replicate(&cfg).unwrap();
    write_study_outputs(dir, &result, false).unwrap();
}

fn attr(tag: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end].parse().unwrap()
}

#[test]
fn two_criteria_give_two_figures_and_one_markdown() {
    let dir = tempfile::tempdir().unwrap();
    study(dir.path(), vec![Criterion::Auc, Criterion::Kl]);
    let files = write_report(dir.path()).unwrap();
    assert_eq!(files.figures.len(), 2);
    let svgs: Vec<_> = fs::read_dir(dir.path().join("figures")).unwrap().collect();
    assert_eq!(svgs.len(), 2);
    let mds: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "md"))
        .collect();
    assert_eq!(mds.len(), 1);
    let text = fs::read_to_string(&files.markdown).unwrap();
    assert!(text.contains("| tree | KL* |"));
    assert!(text.contains("ΔKL"));
}

#[test]
fn bar_heights_follow_csv_proportions() {
    let dir = tempfile::tempdir().unwrap();
    study(dir.path(), vec![Criterion::Kl]);
    let files = write_report(dir.path()).unwrap();
    let svg_text = fs::read_to_string(&files.figures[0]).unwrap();
    assert!(svg_text.starts_with("<svg") && !svg_text.contains("href"));
    let csv_path = dir.path().join("histograms").join(histogram_file("tree", "KL*"));
    let bins = ScoreHistogram::read_csv_proportions(fs::File::open(csv_path).unwrap()).unwrap();
    let reference =
        ScoreHistogram::read_csv_proportions(fs::File::open(dir.path().join("histograms/reference.csv")).unwrap())
            .unwrap();
    let ymax = svg::y_max(&bins, &reference);
    let bars: Vec<&str> = svg_text
        .lines()
        .filter(|l| l.starts_with("<rect") && l.contains("data-proportion"))
        .collect();
    assert_eq!(bars.len(), bins.len());
    for (bar, (_, _, p)) in bars.iter().zip(&bins) {
        let h = attr(bar, "height");
        assert!((h - p / ymax * svg::PLOT_HEIGHT).abs() <= 5e-4, "{bar} vs {p}");
    }
}

#[test]
fn report_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    study(dir.path(), vec![Criterion::Auc, Criterion::Kl]);
    let a = write_report(dir.path()).unwrap();
    let first: Vec<Vec<u8>> = std::iter::once(&a.markdown).chain(&a.figures).map(|p| fs::read(p).unwrap()).collect();
    let b = write_report(dir.path()).unwrap();
    let second: Vec<Vec<u8>> = std::iter::once(&b.markdown).chain(&b.figures).map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn empty_directory_lists_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    match write_report(dir.path()) {
        Err(Error::MissingFiles(paths)) => {
            assert!(paths.contains(&dir.path().join("manifest.json")));
            assert!(paths.contains(&dir.path().join("aggregate.csv")));
        }
        other => panic!("unexpected {other:?}"),
    }
}
