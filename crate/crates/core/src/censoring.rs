//! Conditional Kaplan-Meier correction for right-censored outcomes.
//!
//! Given base weights computed as if the censored observations `u = min(y, v)`
//! were the outcomes themselves, the transform zeroes censored points and
//! redistributes their mass to larger uncensored observations, exactly as the
//! product-limit estimator does. When the largest observation is censored the
//! output keeps its mass deficit: prescriptions are invariant to positive
//! rescaling of weights, so no renormalization is applied.

use crate::error::Error;
use crate::weights::WeightVector;
use crate::Result;

/// Inputs to the Kaplan-Meier weight transform.
#[derive(Clone, Debug)]
pub struct CensoredWeightInput<'a> {
    /// Nonnegative base weights over the training sample.
    pub base: &'a WeightVector,
    /// Observed `u^i = min(y^i, v^i)`, full training length.
    pub u: &'a [f64],
    /// `true` iff observation `i` is uncensored.
    pub delta: &'a [bool],
}

/// Applies the conditional Kaplan-Meier transform.
///
/// Support ordering: ascending `u`, events (uncensored) before censorings at
/// ties, index as the final tie-break. Zero-weight points are dropped before
/// the telescoping product is formed.
pub fn km_transform(input: &CensoredWeightInput) -> Result<WeightVector> {
    let n = input.base.n_train();
    if input.u.len() != n || input.delta.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "weights cover {n} points, u has {}, delta has {}",
            input.u.len(),
            input.delta.len()
        )));
    }
    if input.base.min_weight() < 0.0 {
        return Err(Error::NegativeKaplanMeierWeights);
    }

    let mut order: Vec<(usize, f64)> =
        input.base.entries().iter().filter(|(_, w)| *w > 0.0).copied().collect();
    order.sort_unstable_by(|a, b| {
        input.u[a.0]
            .total_cmp(&input.u[b.0])
            .then((!input.delta[a.0]).cmp(&!input.delta[b.0]))
            .then(a.0.cmp(&b.0))
    });

    let m = order.len();
    let mut tail = vec![0.0; m + 1];
    for pos in (0..m).rev() {
        tail[pos] = tail[pos + 1] + order[pos].1;
    }

    let mut out = Vec::with_capacity(m);
    let mut survival = 1.0;
    for (pos, &(i, w)) in order.iter().enumerate() {
        if input.delta[i] {
            out.push((i, w / tail[pos] * survival));
            survival *= tail[pos + 1] / tail[pos];
        }
    }
    WeightVector::new(out, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn km(base: &[f64], u: &[f64], delta: &[bool]) -> WeightVector {
        let wv = WeightVector::new(
            base.iter().enumerate().map(|(i, w)| (i, *w)).collect(),
            base.len(),
        )
        .unwrap();
        km_transform(&CensoredWeightInput { base: &wv, u, delta }).unwrap()
    }

    #[test]
    fn no_censorship_is_identity() {
        let out = km(&[0.5, 0.5], &[1.0, 2.0], &[true, true]);
        assert!((out.get(0) - 0.5).abs() < 1e-12);
        assert!((out.get(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn censored_small_point_passes_mass_up() {
        let out = km(&[0.5, 0.5], &[1.0, 2.0], &[false, true]);
        assert_eq!(out.get(0), 0.0);
        assert!((out.get(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn censored_top_point_loses_mass() {
        let out = km(&[0.5, 0.5], &[1.0, 2.0], &[true, false]);
        assert!((out.get(0) - 0.5).abs() < 1e-12);
        assert_eq!(out.get(1), 0.0);
        assert!((out.sum() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_weights_rejected() {
        let wv = WeightVector::new(vec![(0, 1.5), (1, -0.5)], 2).unwrap();
        let r = km_transform(&CensoredWeightInput {
            base: &wv,
            u: &[1.0, 2.0],
            delta: &[true, true],
        });
        assert!(matches!(r, Err(Error::NegativeKaplanMeierWeights)));
    }

    #[test]
    fn no_censoring_identity_random_vectors() {
        let mut rng = crate::rng::rng_from_seed(17);
        for trial in 0..1000 {
            let n = rng.gen_range(1..60);
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let delta = vec![true; n];
            let out = km(&w, &u, &delta);
            for (i, wi) in w.iter().enumerate() {
                assert!(
                    (out.get(i) - wi / 1.0).abs() < 1e-12,
                    "trial {trial}: index {i} {} vs {}",
                    out.get(i),
                    wi
                );
            }
        }
    }

    #[test]
    fn monotone_mass_and_support_shrinkage() {
        let mut rng = crate::rng::rng_from_seed(18);
        for _ in 0..200 {
            let n = rng.gen_range(2..40);
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            // Randomly zero some base weights.
            for v in w.iter_mut() {
                if rng.gen_bool(0.3) {
                    *v = 0.0;
                }
            }
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                continue;
            }
            w.iter_mut().for_each(|v| *v /= total);
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let delta: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
            let out = km(&w, &u, &delta);
            assert!(out.sum() <= 1.0 + 1e-9);
            assert!(out.min_weight() >= 0.0 || out.is_empty());
            for (i, wi) in out.to_dense().iter().enumerate() {
                if *wi > 0.0 {
                    assert!(w[i] > 0.0 && delta[i], "support grew at {i}");
                }
            }
            // Mass is conserved when the largest supported u is uncensored.
            let top = (0..n)
                .filter(|&i| w[i] > 0.0)
                .max_by(|&a, &b| {
                    u[a].total_cmp(&u[b])
                        .then((!delta[a]).cmp(&!delta[b]))
                        .then(a.cmp(&b))
                })
                .unwrap();
            if delta[top] {
                assert!((out.sum() - 1.0).abs() < 1e-9, "mass {} lost", out.sum());
            }
        }
    }

    #[test]
    fn km_weighted_cdf_beats_naive_under_censoring() {
        // Y ~ N(0,1), V ~ N(0.5,1), about 30% censoring: the KM-weighted
        // CDF estimate at the true median must be closer than the naive
        // censorship-ignoring estimate, on average over 100 trials.
        let mut rng = crate::rng::rng_from_seed(77);
        let mut err_km = 0.0;
        let mut err_naive = 0.0;
        for _ in 0..100 {
            let n = 250;
            let mut u = Vec::with_capacity(n);
            let mut delta = Vec::with_capacity(n);
            for _ in 0..n {
                let y: f64 = rng.sample(rand_distr::StandardNormal);
                let v: f64 = 0.5 + rng.sample::<f64, _>(rand_distr::StandardNormal);
                u.push(y.min(v));
                delta.push(y <= v);
            }
            let base = WeightVector::uniform(n);
            let out = km_transform(&CensoredWeightInput { base: &base, u: &u, delta: &delta })
                .unwrap();
            let cdf_at = |wv: &WeightVector| -> f64 {
                let total = wv.sum();
                wv.entries().iter().filter(|(i, _)| u[*i] <= 0.0).map(|(_, w)| w).sum::<f64>()
                    / total
            };
            err_km += (cdf_at(&out) - 0.5).abs();
            err_naive += (cdf_at(&base) - 0.5).abs();
        }
        assert!(
            err_km < err_naive,
            "KM error {err_km} should beat naive {err_naive}"
        );
    }
}
