use scoreshape::data::{split, Dataset};
use scoreshape::dgp::{generate, DgpId, DgpSpec};
use scoreshape::harness::*;
use scoreshape::metrics::MetricTable;
use scoreshape::Error;

fn dgp1_splits(n: usize, noise: usize, seed: u64) -> (Dataset, Dataset, Dataset) {
    let s = generate(&DgpSpec::new(DgpId::Dgp1, noise, seed), 3 * n).unwrap();
    let parts = split(3 * n, [1.0 / 3.0; 3], seed + 1).unwrap();
    s.dataset.partition(&parts)
}

fn table(auc: f64, brier: f64, ici: f64, kl: f64) -> MetricTable {
    MetricTable {
        auc,
        brier,
        ici,
        kl,
        qr: 1.0,
        mse_vs_truth: Some(brier / 10.0),
    }
}

fn candidate(min_bucket: usize, t: MetricTable) -> Candidate {
    Candidate {
        point: GridPoint::Tree { min_bucket },
        validation: t,
        leaves: None,
    }
}

#[test]
fn default_grids_follow_power_sequences() {
    let GridSpec::Tree { min_buckets } = GridSpec::default_tree() else { panic!() };
    assert_eq!(min_buckets.first(), Some(&2));
    assert_eq!(min_buckets.last(), Some(&1024));
    assert!(min_buckets.windows(2).all(|w| w[0] < w[1]));
    let GridSpec::Forest { mtry, min_buckets, n_trees } = GridSpec::default_forest(5) else { panic!() };
    assert_eq!(mtry, vec![2, 4]);
    assert_eq!(n_trees, 250);
    assert_eq!(min_buckets.first(), Some(&2));
    assert_eq!(*min_buckets.last().unwrap(), 2f64.powf(13.8).round() as usize);
    assert_eq!(GridSpec::default_boost().points().len(), 1200);
}

#[test]
fn dominant_candidate_wins_every_criterion() {
    let cands = vec![
        candidate(2, table(0.70, 0.22, 0.05, 0.30)),
        candidate(4, table(0.75, 0.20, 0.02, 0.10)),
        candidate(8, table(0.72, 0.21, 0.03, 0.20)),
    ];
    for c in Criterion::ALL {
        assert_eq!(select(&cands, c), Some(1), "{c}");
    }
}

#[test]
fn ties_go_to_the_first_point_and_nan_is_skipped() {
    let t = table(0.7, 0.2, 0.03, 0.1);
    let cands = vec![candidate(2, t), candidate(4, t)];
    for c in Criterion::ALL {
        assert_eq!(select(&cands, c), Some(0));
    }
    let cands = vec![candidate(2, table(f64::NAN, 0.2, 0.03, f64::NAN)), candidate(4, t)];
    assert_eq!(select(&cands, Criterion::Auc), Some(1));
    assert_eq!(select(&cands, Criterion::Kl), Some(1));
}

#[test]
fn singleton_grid_selects_the_same_model_everywhere() {
    let (train, val, test) = dgp1_splits(600, 0, 3);
    let grid = GridSpec::Tree { min_buckets: vec![20] };
    let reference = ReferenceDistribution::TrueProbabilities;
    let search = run_grid(&train, &val, &grid, &reference, &Criterion::ALL, 1).unwrap();
    assert_eq!(search.selected.len(), 5);
    assert!(search.selected.iter().all(|&(_, i)| i == 0));
    let report = SelectionReport::from_search(&search, &test, &reference).unwrap();
    let d = report.test_deltas.unwrap();
    assert_eq!((d.auc, d.brier, d.ici, d.kl, d.qr), (0.0, 0.0, 0.0, 0.0, 0.0));
}

#[test]
fn selections_are_argoptima_on_validation() {
    let (train, val, test) = dgp1_splits(10_000, 0, 11);
    let reference = ReferenceDistribution::TrueProbabilities;
    let search = run_grid(&train, &val, &GridSpec::default_tree(), &reference, &Criterion::ALL, 1).unwrap();
    let kl = &search.candidates[search.selection(Criterion::Kl).unwrap()].validation;
    let auc = &search.candidates[search.selection(Criterion::Auc).unwrap()].validation;
    for c in &search.candidates {
        assert!(kl.kl <= c.validation.kl);
        assert!(auc.auc >= c.validation.auc);
    }
    assert!(kl.kl <= auc.kl && auc.auc >= kl.auc);

    // deltas recomputable from the stored test tables
    let report = SelectionReport::from_search(&search, &test, &reference).unwrap();
    let a = report.entry("AUC*").unwrap().test;
    let k = report.entry("KL*").unwrap().test;
    let d = report.test_deltas.unwrap();
    for (delta, diff) in [
        (d.auc, k.auc - a.auc),
        (d.brier, k.brier - a.brier),
        (d.ici, k.ici - a.ici),
        (d.kl, k.kl - a.kl),
        (d.qr, k.qr - a.qr),
    ] {
        assert!((delta - diff).abs() <= 1e-12);
    }
    let smallest = report.entry("Smallest").unwrap();
    let largest = report.entry("Largest").unwrap();
    assert!(smallest.leaves < largest.leaves);
}

#[test]
fn mse_is_skipped_without_truth() {
    let (train, val, _) = dgp1_splits(400, 0, 5);
    let (train, val) = (train.without_true_prob(), val.without_true_prob());
    let prior = scoreshape::distributions::BetaPrior::new(2.0, 2.0).unwrap();
    let reference = ReferenceDistribution::BetaPrior(prior);
    let grid = GridSpec::Tree { min_buckets: vec![5, 50] };
    let search = run_grid(&train, &val, &grid, &reference, &Criterion::ALL, 1).unwrap();
    assert_eq!(search.selected.len(), 4);
    assert!(search.selection(Criterion::Mse).is_none());
}

#[test]
fn boost_grid_models_reproduce_staged_metrics() {
    let (train, val, _) = dgp1_splits(800, 2, 21);
    let reference = ReferenceDistribution::TrueProbabilities;
    let grid = GridSpec::Boost {
        depths: vec![2, 3],
        max_rounds: 30,
        learning_rate: 0.3,
    };
    let search = run_grid(&train, &val, &grid, &reference, &Criterion::ALL, 1).unwrap();
    assert_eq!(search.candidates.len(), 60);
    let profile = reference.profile(&val).unwrap();
    for &(_, i) in &search.selected {
        let scores = search.model(i).unwrap().predict(&val).unwrap();
        let again = scoreshape::metrics::metric_table(&scores, val.target(), &profile).unwrap();
        assert_eq!(again, search.candidates[i].validation, "candidate {i}");
    }
}

#[test]
fn forest_grid_rejects_oversized_mtry() {
    let (train, val, _) = dgp1_splits(200, 0, 2);
    let grid = GridSpec::Forest {
        mtry: vec![9],
        min_buckets: vec![5],
        n_trees: 5,
    };
    let err = run_grid(&train, &val, &grid, &ReferenceDistribution::TrueProbabilities, &Criterion::ALL, 1);
    assert!(matches!(err, Err(Error::Parameter(_))));
}

fn small_config(reps: usize, seed: u64) -> StudyConfig {
    let mut cfg = StudyConfig::new(DgpId::Dgp1, 0, 400, reps, seed);
    cfg.grids = vec![GridSpec::Tree {
        min_buckets: vec![2, 8, 32, 128],
    }];
    cfg.include_glm = true;
    cfg
}

#[test]
fn replicate_is_deterministic() {
    let a = replicate(&small_config(2, 9)).unwrap();
    let b = replicate(&small_config(2, 9)).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(aggregate(&a.rows), aggregate(&b.rows));
    let c = replicate(&small_config(2, 10)).unwrap();
    assert_ne!(a.rows, c.rows);
}

#[test]
fn aggregate_matches_recomputation_and_ignores_order() {
    let result = replicate(&small_config(3, 4)).unwrap();
    let agg = aggregate(&result.rows);
    assert_eq!(agg[0].model, "tree");
    assert_eq!(agg[0].selection, "Smallest");
    assert_eq!(agg.last().unwrap().model, "glm");
    for a in &agg {
        let members: Vec<_> = result
            .rows
            .iter()
            .filter(|r| r.model == a.model && r.selection == a.selection)
            .collect();
        assert_eq!(a.reps, 3);
        let mean = members.iter().map(|r| r.test.kl).sum::<f64>() / 3.0;
        assert!((a.kl.mean - mean).abs() < 1e-12);
        let var = members.iter().map(|r| (r.test.kl - mean).powi(2)).sum::<f64>() / 2.0;
        assert!((a.kl.sd - var.sqrt()).abs() < 1e-12);
    }
    let mut reversed = result.rows.clone();
    reversed.reverse();
    assert_eq!(aggregate(&reversed), agg);
    assert_eq!(delta_table(&reversed), delta_table(&result.rows));
}

#[test]
fn delta_table_is_consistent_with_aggregate() {
    let result = replicate(&small_config(3, 8)).unwrap();
    let agg = aggregate(&result.rows);
    let deltas = delta_table(&result.rows);
    assert_eq!(deltas.len(), 1);
    let d = &deltas[0];
    let find = |s: &str| agg.iter().find(|a| a.model == "tree" && a.selection == s).unwrap();
    assert!((d.auc_star[3].mean - find("AUC*").kl.mean).abs() < 1e-12);
    assert!((d.kl_star[0].mean - find("KL*").auc.mean).abs() < 1e-12);
    for j in 0..5 {
        assert!((d.delta[j].mean - (d.kl_star[j].mean - d.auc_star[j].mean)).abs() < 1e-12);
    }
}

#[test]
fn replication_failure_names_index_and_seed() {
    let mut cfg = small_config(2, 1);
    cfg.learners = vec![LearnerKind::Forest];
    cfg.grids = vec![GridSpec::Forest {
        mtry: vec![50],
        min_buckets: vec![5],
        n_trees: 3,
    }];
    match replicate(&cfg) {
        Err(Error::Replication { replication, seed, .. }) => {
            assert!(replication < 2);
            assert_eq!(seed, scoreshape::rng::derive_seed(1, &[replication as u64]));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(replicate(&small_config(0, 1)), Err(Error::Parameter(_))));
}

#[test]
fn study_config_reads_toml() {
    let cfg = StudyConfig::from_toml_str(
        r#"
dgp = "1"
n = 500
reps = 2
seed = 3
learners = ["tree", "boost"]
criteria = ["AUC*", "KL*"]

[[grids]]
learner = "boost"
depths = [2]
max_rounds = 10
"#,
    )
    .unwrap();
    assert_eq!(cfg.learners, vec![LearnerKind::Tree, LearnerKind::Boost]);
    assert_eq!(cfg.criteria, vec![Criterion::Auc, Criterion::Kl]);
    assert_eq!(cfg.grid_for(LearnerKind::Boost, 5).points().len(), 10);
    assert_eq!(cfg.grid_for(LearnerKind::Tree, 5), GridSpec::default_tree());
    assert!(StudyConfig::from_toml_str("dgp = \"1\"\nbogus = 1\n").is_err());
}

#[test]
fn outputs_round_trip_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study");
    let result = replicate(&small_config(2, 6)).unwrap();
    write_study_outputs(&out, &result, false).unwrap();
    let manifest = validate_study_outputs(&out).unwrap();
    assert_eq!(manifest.replication_seeds, result.replication_seeds);

    let mut r = csv::Reader::from_path(out.join("replications.csv")).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), REPLICATIONS_HEADER);
    assert_eq!(r.records().count(), result.rows.len());
    assert!(out.join("histograms").join(histogram_file("tree", "KL*")).exists());

    assert!(write_study_outputs(&out, &result, false).is_err());
    write_study_outputs(&out, &result, true).unwrap();

    std::fs::remove_file(out.join("aggregate.csv")).unwrap();
    match validate_study_outputs(&out) {
        Err(Error::MissingFiles(paths)) => assert_eq!(paths, vec![out.join("aggregate.csv")]),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(validate_study_outputs(dir.path()), Err(Error::MissingFiles(_))));
}

#[test]
fn real_data_path_runs_on_synthetic_data() {
    let s = generate(&DgpSpec::new(DgpId::Dgp3, 0, 12), 3000).unwrap();
    let ds = s.dataset.without_true_prob();
    let mut config = RealDataConfig::new(ds.n_features(), 5);
    config.grids = vec![
        GridSpec::Forest {
            mtry: vec![2, 4],
            min_buckets: vec![5, 40],
            n_trees: 20,
        },
        GridSpec::Boost {
            depths: vec![2],
            max_rounds: 40,
            learning_rate: 0.3,
        },
    ];
    let report = real_data_study(&ds, &config).unwrap();
    assert!(report.prior.alpha.is_finite() && report.prior.beta.is_finite());
    assert_eq!(report.split_sizes, (1920, 480, 600));
    for r in &report.reports {
        assert!(r.validation_deltas.unwrap().kl <= 0.0);
        assert!(r.validation_deltas.unwrap().auc <= 0.0);
        assert!(r.entry("MSE*").is_none());
    }

    let dir = tempfile::tempdir().unwrap();
    write_real_data_outputs(dir.path(), &report, 5, serde_json::to_value(&config).unwrap(), false).unwrap();
    let manifest = validate_study_outputs(dir.path()).unwrap();
    assert_eq!(manifest.kind, "real-data");
}

#[test]
fn real_data_singleton_grid_has_zero_deltas() {
    let s = generate(&DgpSpec::new(DgpId::Dgp1, 0, 2), 1500).unwrap();
    let ds = s.dataset.without_true_prob();
    let mut config = RealDataConfig::new(ds.n_features(), 1);
    config.grids = vec![GridSpec::Tree { min_buckets: vec![10] }];
    let report = real_data_study(&ds, &config).unwrap();
    let d = report.reports[0].test_deltas.unwrap();
    assert_eq!((d.auc, d.kl), (0.0, 0.0));
}
