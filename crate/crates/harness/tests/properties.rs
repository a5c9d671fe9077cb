use proptest::prelude::*;
use stit_harness::stats::{cov_gap, ks_two_sample, wilson, EstimateWithCI, Z95};

proptest! {
    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1usize..5000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as usize;
        let e = EstimateWithCI::from_count(k, n, 0);
        prop_assert!(0.0 <= e.ci_lo && e.ci_lo <= e.p_hat && e.p_hat <= e.ci_hi && e.ci_hi <= 1.0);
    }

    #[test]
    fn wilson_is_symmetric(n in 1usize..5000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as usize;
        let (lo, hi) = wilson(k, n, Z95);
        let (lo2, hi2) = wilson(n - k, n, Z95);
        prop_assert!((lo - (1.0 - hi2)).abs() < 1e-12 && (hi - (1.0 - lo2)).abs() < 1e-12);
    }

    #[test]
    fn ks_is_bounded_and_symmetric(
        xs in prop::collection::vec(-10.0f64..10.0, 50..200),
        ys in prop::collection::vec(-10.0f64..10.0, 50..200),
    ) {
        let a = ks_two_sample(&xs, &ys).unwrap();
        let b = ks_two_sample(&ys, &xs).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.statistic) && (0.0..=1.0).contains(&a.p_value));
        prop_assert_eq!(a.statistic, b.statistic);
        prop_assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn ks_is_invariant_under_monotone_maps(xs in prop::collection::vec(-5.0f64..5.0, 50..150), ys in prop::collection::vec(-5.0f64..5.0, 50..150)) {
        let a = ks_two_sample(&xs, &ys).unwrap();
        let f = |v: &Vec<f64>| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        let b = ks_two_sample(&f(&xs), &f(&ys)).unwrap();
        prop_assert!((a.statistic - b.statistic).abs() < 1e-12);
    }

    #[test]
    fn cov_gap_is_symmetric(pairs in prop::collection::vec(any::<(bool, bool)>(), 1..500)) {
        let g = cov_gap(&pairs);
        let swapped: Vec<(bool, bool)> = pairs.iter().map(|(a, b)| (*b, *a)).collect();
        let h = cov_gap(&swapped);
        prop_assert!((g.gap - h.gap).abs() < 1e-12 && (g.sigma - h.sigma).abs() < 1e-12);
        prop_assert!(g.gap.abs() <= 0.25 + 1e-12);
    }
}
