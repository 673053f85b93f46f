use rand::Rng;
use scoreshape::dgp::*;
use scoreshape::distributions::{fit_beta_mle, BetaKernelDensity};
use scoreshape::rng::stream;
use scoreshape::Error;

fn scalar_sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

#[test]
fn generation_is_deterministic() {
    for id in DgpId::ALL {
        let spec = DgpSpec::new(id, 10, 42);
        let a = generate(&spec, 500).unwrap();
        let b = generate(&spec, 500).unwrap();
        assert_eq!(a, b);
        let c = generate(&DgpSpec::new(id, 10, 43), 500).unwrap();
        assert_ne!(a.dataset.target(), c.dataset.target());
    }
}

#[test]
fn true_probabilities_match_scalar_recomputation() {
    for id in DgpId::ALL {
        let spec = DgpSpec::new(id, 3, 5);
        let s = generate(&spec, 2_000).unwrap();
        let ds = &s.dataset;
        let names = ds.feature_names();
        for (i, row) in ds.rows().enumerate() {
            let x = |name: &str| row[names.iter().position(|n| *n == name).unwrap()];
            let eta = match id {
                DgpId::Dgp1 | DgpId::Dgp2 => 0.5 * x("x1") + x("x2"),
                DgpId::Dgp3 => {
                    let mut e = 0.1 * x("x1") + 0.2 * x("x2") + 0.3 * x("x3") + 0.4 * x("x4") + 0.5 * x("x5");
                    for (v, (levels, beta)) in [2usize, 2, 3, 5, 2].iter().zip([0.01, 0.02, 0.03, 0.04, 0.05]).enumerate() {
                        let code = (0..*levels).find(|l| x(&format!("c{}={l}", v + 1)) == 1.0).unwrap();
                        e += beta * code as f64;
                    }
                    e
                }
                DgpId::Dgp4 => {
                    0.5 * x("x1") + x("x2") + 0.3 * x("x3") + 0.5 * x("x1").powi(2) + 0.5 * x("x2") * x("x3")
                }
            };
            let mut p = scalar_sigmoid(eta);
            if id == DgpId::Dgp2 {
                p = p.powi(3);
            }
            assert!((s.true_prob()[i] - p).abs() < 1e-12, "{id} row {i}");
        }
    }
}

#[test]
fn dgp1_mean_probability_matches_oracle() {
    let s = generate(&DgpSpec::new(DgpId::Dgp1, 0, 2024), 10_000).unwrap();
    let ds = &s.dataset;
    let oracle: f64 = ds.rows().map(|r| scalar_sigmoid(0.5 * r[0] + r[1])).sum::<f64>() / ds.n() as f64;
    let mean = s.true_prob().iter().sum::<f64>() / ds.n() as f64;
    assert!((mean - oracle).abs() <= 0.02);
    assert!((mean - 0.5).abs() < 0.02);
    let rate = ds.positive_rate();
    assert!((rate - mean).abs() < 0.02);
}

#[test]
fn noise_columns_are_uncorrelated_with_target() {
    let s = generate(&DgpSpec::new(DgpId::Dgp1, 10, 99), 10_000).unwrap();
    let ds = &s.dataset;
    let y = ds.target();
    let my = y.iter().sum::<f64>() / y.len() as f64;
    for j in 2..ds.n_features() {
        let x = ds.column(j);
        let mx = x.iter().sum::<f64>() / x.len() as f64;
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        let r = cov / (vx * vy).sqrt();
        assert!(r.abs() <= 0.05, "column {j}: {r}");
    }
}

#[test]
fn csv_export_carries_true_probability() {
    let s = generate(&DgpSpec::new(DgpId::Dgp3, 2, 1), 50).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.contains("true_probability"));
    assert!(header.contains("c4"));
    let schema = scoreshape::data::write_schema(&s.dataset);
    let back = scoreshape::data::read_csv(text.as_bytes(), &schema).unwrap();
    assert_eq!(back.true_prob(), s.dataset.true_prob());
    assert_eq!(back.target(), s.dataset.target());
}

#[test]
fn uniform_sample_toward_uniform() {
    let mut rng = stream(1, &[]);
    let s: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let out = resample_rejection(&s, &UniformTarget, &RejectionOptions::default()).unwrap();
    assert!(out.ks <= 0.05, "{}", out.ks);
    let mut sorted = out.kept.clone();
    sorted.dedup();
    assert_eq!(sorted, out.kept);
}

#[test]
fn self_target_keeps_one_over_c() {
    let mut rng = stream(2, &[]);
    let s: Vec<f64> = (0..5_000).map(|_| rng.random::<f64>().powi(2)).collect();
    let kde = BetaKernelDensity::with_default_bandwidth(&s).unwrap().on_grid(1000);
    struct Kde<'a>(&'a scoreshape::distributions::GridDensity);
    impl TargetDistribution for Kde<'_> {
        fn pdf(&self, x: f64) -> f64 {
            self.0.evaluate(x)
        }
        fn cdf(&self, x: f64) -> f64 {
            // only used for the KS report
            let m = 2000;
            (0..m).map(|k| self.0.evaluate((k as f64 + 0.5) / m as f64 * x)).sum::<f64>() * x / m as f64
        }
    }
    let target = Kde(&kde);
    let phi = |x: f64| kde.evaluate(x);
    let out = resample_rejection_with_density(&s, &phi, &target, &RejectionOptions::default()).unwrap();
    assert!((out.c - 1.0).abs() < 1e-12);
    let frac = out.kept_fraction();
    let n = s.len() as f64;
    let sigma = (1.0 / out.c * (1.0 - 1.0 / out.c) / n).sqrt();
    assert!((frac - 1.0 / out.c).abs() <= 3.0 * sigma + 1e-12);
}

#[test]
fn point_mass_exceeds_c_max() {
    let s = vec![0.5; 1_000];
    let err = resample_rejection(&s, &UniformTarget, &RejectionOptions::default()).unwrap_err();
    assert!(matches!(err, Error::RejectionConstant { .. }), "{err}");
}

#[test]
fn iterative_loose_epsilon_returns_immediately() {
    let mut rng = stream(3, &[]);
    let s: Vec<f64> = (0..500).map(|_| rng.random::<f64>().powi(3)).collect();
    let out = resample_iterative(&s, &UniformTarget, &IterativeOptions::new(0.5, 1)).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.kept.len(), 500);
}

#[test]
fn iterative_self_beta_fit_terminates_quickly() {
    let mut rng = stream(4, &[]);
    let beta = rand_distr::Beta::new(2.0, 5.0).unwrap();
    let s: Vec<f64> = (0..20_000).map(|_| rand_distr::Distribution::sample(&beta, &mut rng)).collect();
    let fit = fit_beta_mle(&s).unwrap();
    let out = resample_iterative(&s, &fit, &IterativeOptions::new(0.05, 1)).unwrap();
    assert!(out.iterations <= 2);
    assert!(*out.ks_trace.last().unwrap() <= 0.05);
}

#[test]
fn iterative_reaches_skewed_target() {
    let mut rng = stream(5, &[]);
    let s: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
    let target = scoreshape::distributions::BetaPrior::new(2.0, 5.0).unwrap();
    let out = resample_iterative(&s, &target, &IterativeOptions::new(0.03, 9)).unwrap();
    assert!(out.ks_trace.iter().all(|d| d.is_finite()));
    assert!(*out.ks_trace.last().unwrap() <= 0.03);
    assert!(out.kept.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn iterative_floor_error_carries_best_ks() {
    let s = vec![0.9; 200];
    let target = scoreshape::distributions::BetaPrior::new(1.0, 30.0).unwrap();
    let mut opts = IterativeOptions::new(0.01, 3);
    opts.max_iterations = 50;
    match resample_iterative(&s, &target, &opts) {
        Err(Error::Resample { best_ks, .. }) => assert!(best_ks.is_finite() && best_ks > 0.01),
        other => panic!("{other:?}"),
    }
}

#[test]
fn dgp4_toward_dgp1_beta_fit() {
    let d1 = generate(&DgpSpec::new(DgpId::Dgp1, 0, 11), 100_000).unwrap();
    let fit = fit_beta_mle(d1.true_prob()).unwrap();
    let d4 = generate(&DgpSpec::new(DgpId::Dgp4, 0, 12), 100_000).unwrap();
    let out = resample_iterative(d4.true_prob(), &fit, &IterativeOptions::new(0.05, 13)).unwrap();
    assert!(out.kept.len() >= 1_000);
    assert!(*out.ks_trace.last().unwrap() <= 0.05);
}
