use proptest::prelude::*;

use scoreshape::distributions::{histogram, kl_divergence, DEFAULT_BINS};
use scoreshape::metrics::{auc, brier, interdecile_range, quantile_ratio};

fn scores_and_labels() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((0.0..=1.0f64, any::<bool>()), 2..200).prop_filter_map("need both classes", |rows| {
        let pos = rows.iter().filter(|r| r.1).count();
        (pos > 0 && pos < rows.len()).then(|| {
            rows.into_iter()
                .map(|(s, y)| (s, if y { 1.0 } else { 0.0 }))
                .unzip()
        })
    })
}

fn unit_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 1..300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kl_is_non_negative(a in unit_sample(), b in unit_sample()) {
        let kl = kl_divergence(&histogram(&a, DEFAULT_BINS).unwrap(), &histogram(&b, DEFAULT_BINS).unwrap()).unwrap();
        prop_assert!(kl >= -1e-12);
    }

    #[test]
    fn kl_of_a_histogram_with_itself_is_zero(a in unit_sample()) {
        let h = histogram(&a, DEFAULT_BINS).unwrap();
        prop_assert!(kl_divergence(&h, &h).unwrap().abs() < 1e-12);
    }

    #[test]
    fn histogram_ignores_order(mut a in unit_sample(), rot in 0usize..300) {
        let h = histogram(&a, DEFAULT_BINS).unwrap();
        let k = rot % a.len();
        a.rotate_left(k);
        a.reverse();
        prop_assert_eq!(h, histogram(&a, DEFAULT_BINS).unwrap());
    }

    #[test]
    fn histogram_proportions_sum_to_one(a in unit_sample(), bins in 1usize..50) {
        let h = histogram(&a, bins).unwrap();
        prop_assert!((h.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(h.counts.iter().sum::<u64>(), a.len() as u64);
    }

    #[test]
    fn auc_is_invariant_to_monotone_maps((s, y) in scores_and_labels()) {
        let base = auc(&s, &y).unwrap();
        let squashed: Vec<f64> = s.iter().map(|v| v.powi(3) * 0.5 + 0.1).collect();
        prop_assert!((auc(&squashed, &y).unwrap() - base).abs() < 1e-12);
        let flipped: Vec<f64> = s.iter().map(|v| 1.0 - v).collect();
        prop_assert!((auc(&flipped, &y).unwrap() - (1.0 - base)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn brier_is_bounded((s, y) in scores_and_labels()) {
        let b = brier(&s, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn quantile_ratio_is_scale_equivariant(
        s in prop::collection::vec(0.0..=1.0f64, 2..200),
        r in prop::collection::vec(0.0..=1.0f64, 10..200),
        a in 0.05..1.0f64,
    ) {
        prop_assume!(interdecile_range(&r) > 1e-6);
        let base = quantile_ratio(&s, &r).unwrap();
        let shifted: Vec<f64> = s.iter().map(|v| a * v + (1.0 - a) / 2.0).collect();
        let q = quantile_ratio(&shifted, &r).unwrap();
        prop_assert!((q - a * base).abs() < 1e-9, "{q} vs {}", a * base);
    }
}
