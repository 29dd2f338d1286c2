//! Property tests for the weight constructions.

use prescriptor_core::linalg::Mat;
use prescriptor_core::weights::{
    knn_weights, kr_weights, loess_weights, radius_knn_weights, recursive_kr_weights,
    BandwidthSchedule, KernelKind,
};
use proptest::prelude::*;

fn points(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, d), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nonnegative_constructions_sum_to_one(
        pts in points(12, 2),
        q in prop::collection::vec(-5.0..5.0f64, 2),
        k in 1usize..12,
    ) {
        let tx = Mat::from_rows(&pts);
        for wv in [
            knn_weights(&tx, &q, k).unwrap(),
            radius_knn_weights(&tx, &q, k, |d| (-d).exp()).unwrap(),
            kr_weights(&tx, &q, KernelKind::Gaussian, 1.5).unwrap(),
            recursive_kr_weights(&tx, &q, &BandwidthSchedule::per_point(20.0, 0.1)).unwrap(),
        ] {
            prop_assert!((wv.sum() - 1.0).abs() < 1e-9);
            prop_assert!(wv.min_weight() >= 0.0);
            for &(i, _) in wv.entries() {
                prop_assert!(i < 12);
            }
        }
    }

    #[test]
    fn loess_sums_to_one_and_may_go_negative(
        pts in points(14, 1),
        q in -5.0..5.0f64,
        k in 4usize..14,
    ) {
        let tx = Mat::from_rows(&pts);
        let wv = loess_weights(&tx, &[q], k, KernelKind::Tricubic).unwrap();
        prop_assert!((wv.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn permutation_equivariance(
        pts in points(10, 2),
        q in prop::collection::vec(-5.0..5.0f64, 2),
        k in 1usize..10,
    ) {
        let tx = Mat::from_rows(&pts);
        let rev: Vec<Vec<f64>> = pts.iter().rev().cloned().collect();
        let txr = Mat::from_rows(&rev);
        let a = knn_weights(&tx, &q, k).unwrap();
        let b = knn_weights(&txr, &q, k).unwrap();
        // Reversal maps index i to n-1-i; ties may resolve to different but
        // equidistant points, so compare the weight each point receives only
        // when the distances are unique.
        let mut dists: Vec<f64> = pts
            .iter()
            .map(|p| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
            .collect();
        dists.sort_by(|x, y| x.total_cmp(y));
        let unique = dists.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-9);
        if unique {
            for i in 0..10 {
                prop_assert!((a.get(i) - b.get(9 - i)).abs() < 1e-12);
            }
        }
    }
}
