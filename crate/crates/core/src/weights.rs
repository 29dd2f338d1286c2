//! Local-learning weight functions.
//!
//! Each construction maps a query point to a sparse weight vector over the
//! training sample; the weighted scenario program in [`crate::solve`] turns
//! those weights into decisions. All constructions except the local-linear
//! one produce nonnegative weights summing to one.

use crate::error::Error;
use crate::linalg::{euclidean, Mat};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Sparse weights over training indices.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    entries: Vec<(usize, f64)>,
    n_train: usize,
}

impl WeightVector {
    /// Builds a weight vector, enforcing index uniqueness and finiteness.
    pub fn new(mut entries: Vec<(usize, f64)>, n_train: usize) -> Result<Self> {
        entries.sort_unstable_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!("duplicate index {}", w[0].0)));
            }
        }
        for &(i, w) in &entries {
            if i >= n_train {
                return Err(Error::InvalidArgument(format!("index {i} out of range {n_train}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidArgument("non-finite weight".into()));
            }
        }
        Ok(WeightVector { entries, n_train })
    }

    /// Uniform weights `1/n` over the whole sample.
    pub fn uniform(n_train: usize) -> Self {
        let w = 1.0 / n_train as f64;
        WeightVector { entries: (0..n_train).map(|i| (i, w)).collect(), n_train }
    }

    /// Unit mass on a single index.
    pub fn unit(index: usize, n_train: usize) -> Self {
        WeightVector { entries: vec![(index, 1.0)], n_train }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }

    /// Dense representation of length `n_train`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_train];
        for &(i, w) in &self.entries {
            d[i] = w;
        }
        d
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }
}

/// Kernels of the Nadaraya-Watson family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Naive,
    Epanechnikov,
    Tricubic,
    Gaussian,
}

/// Kernel value at the (vector) argument `u`.
pub fn kernel_eval(kind: KernelKind, u: &[f64]) -> f64 {
    let r = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    kernel_eval_radial(kind, r)
}

/// Kernel value at radius `r = ||u||`.
pub fn kernel_eval_radial(kind: KernelKind, r: f64) -> f64 {
    match kind {
        KernelKind::Naive => {
            if r <= 1.0 {
                1.0
            } else {
                0.0
            }
        }
        KernelKind::Epanechnikov => {
            if r <= 1.0 {
                1.0 - r * r
            } else {
                0.0
            }
        }
        KernelKind::Tricubic => {
            if r <= 1.0 {
                let t = 1.0 - r * r * r;
                t * t * t
            } else {
                0.0
            }
        }
        KernelKind::Gaussian => (-r * r / 2.0).exp(),
    }
}

/// Bandwidth schedules used by the kernel constructions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BandwidthSchedule {
    /// Scale constant `C > 0`.
    pub c: f64,
    /// Decay exponent in `(0, 1)`.
    pub delta_exp: f64,
    pub mode: BandwidthMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthMode {
    /// `h_N = C N^{-delta}` shared by all points.
    FixedPerN,
    /// `h_i = C i^{-delta}` per data point (1-based `i`).
    PerPoint,
    /// `h_N(x)` is the distance to the query's k-th neighbor.
    KnnAdaptive { k: usize },
}

impl BandwidthSchedule {
    pub fn fixed_per_n(c: f64, delta_exp: f64) -> Self {
        BandwidthSchedule { c, delta_exp, mode: BandwidthMode::FixedPerN }
    }

    pub fn per_point(c: f64, delta_exp: f64) -> Self {
        BandwidthSchedule { c, delta_exp, mode: BandwidthMode::PerPoint }
    }

    /// Bandwidth for 1-based data index `i` (per-point mode) or sample size
    /// `i = N` (fixed mode).
    pub fn bandwidth(&self, i: usize) -> f64 {
        self.c * (i as f64).powf(-self.delta_exp)
    }
}

fn check_query(train_x: &Mat, x: &[f64]) -> Result<()> {
    if x.len() != train_x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "query has {} coordinates, training data has {}",
            x.len(),
            train_x.cols()
        )));
    }
    Ok(())
}

/// Indices of the k nearest training points, ties broken lower-index-first.
/// Returned sorted by (distance, index); also yields the distances.
pub fn knn_indices(train_x: &Mat, x: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
    check_query(train_x, x)?;
    let n = train_x.rows();
    if k == 0 || k > n {
        return Err(Error::KExceedsSampleSize);
    }
    let mut dist: Vec<(f64, usize)> =
        (0..n).map(|i| (euclidean(train_x.row(i), x), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    };
    if k < n {
        dist.select_nth_unstable_by(k - 1, cmp);
        dist.truncate(k);
    }
    dist.sort_unstable_by(cmp);
    Ok(dist.into_iter().map(|(d, i)| (i, d)).collect())
}

/// kNN weights: `1/k` on each of the k nearest points.
pub fn knn_weights(train_x: &Mat, x: &[f64], k: usize) -> Result<WeightVector> {
    let nn = knn_indices(train_x, x, k)?;
    let w = 1.0 / k as f64;
    WeightVector::new(nn.into_iter().map(|(i, _)| (i, w)).collect(), train_x.rows())
}

/// Radius-weighted kNN: neighbors weighted by a decreasing positive
/// function of their distance, normalized to sum one.
pub fn radius_knn_weights<F: Fn(f64) -> f64>(
    train_x: &Mat,
    x: &[f64],
    k: usize,
    decay: F,
) -> Result<WeightVector> {
    let nn = knn_indices(train_x, x, k)?;
    let raw: Vec<(usize, f64)> = nn.into_iter().map(|(i, d)| (i, decay(d))).collect();
    let total: f64 = raw.iter().map(|e| e.1).sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::InvalidArgument("decay must be positive on [0, inf)".into()));
    }
    WeightVector::new(raw.into_iter().map(|(i, v)| (i, v / total)).collect(), train_x.rows())
}

/// Nadaraya-Watson weights at bandwidth `h`; zero-kernel points are dropped.
pub fn kr_weights(train_x: &Mat, x: &[f64], kind: KernelKind, h: f64) -> Result<WeightVector> {
    check_query(train_x, x)?;
    if h <= 0.0 {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let mut raw = Vec::new();
    for i in 0..train_x.rows() {
        let kv = kernel_eval_radial(kind, euclidean(train_x.row(i), x) / h);
        if kv > 0.0 {
            raw.push((i, kv));
        }
    }
    let total: f64 = raw.iter().map(|e| e.1).sum();
    if raw.is_empty() || total <= 0.0 {
        return Err(Error::EmptyNeighborhood);
    }
    WeightVector::new(raw.into_iter().map(|(i, v)| (i, v / total)).collect(), train_x.rows())
}

/// Recursive kernel weights with per-point bandwidths and the naive kernel.
/// Appending a data point leaves the unnormalized weights of earlier points
/// unchanged.
pub fn recursive_kr_weights(
    train_x: &Mat,
    x: &[f64],
    schedule: &BandwidthSchedule,
) -> Result<WeightVector> {
    check_query(train_x, x)?;
    if schedule.mode != BandwidthMode::PerPoint {
        return Err(Error::InvalidArgument("recursive weights need a per-point schedule".into()));
    }
    let mut raw = Vec::new();
    for i in 0..train_x.rows() {
        let h = schedule.bandwidth(i + 1);
        if h <= 0.0 {
            return Err(Error::InvalidArgument("bandwidth must be positive".into()));
        }
        let kv = kernel_eval_radial(KernelKind::Naive, euclidean(train_x.row(i), x) / h);
        if kv > 0.0 {
            raw.push((i, kv));
        }
    }
    let total: f64 = raw.iter().map(|e| e.1).sum();
    if raw.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    WeightVector::new(raw.into_iter().map(|(i, v)| (i, v / total)).collect(), train_x.rows())
}

/// Inflation applied to the k-th neighbor distance so boundary points keep
/// an (infinitesimal) positive kernel value.
const LOESS_SPAN_INFLATION: f64 = 1.0 + 1e-9;

/// Local-linear (LOESS) weights with kNN-adaptive span. May contain
/// negative entries; sums to one.
pub fn loess_weights(
    train_x: &Mat,
    x: &[f64],
    k: usize,
    kind: KernelKind,
) -> Result<WeightVector> {
    check_query(train_x, x)?;
    let d = train_x.cols();
    if k < d + 1 {
        return Err(Error::InvalidArgument(format!("loess needs k >= d_x + 1 = {}", d + 1)));
    }
    let nn = knn_indices(train_x, x, k)?;
    let h = nn.last().map(|e| e.1).unwrap_or(0.0);
    if h == 0.0 {
        // Every neighbor coincides with the query point: the local linear
        // fit is degenerate and the kernel weights are uniform over the
        // exact matches.
        let matches: Vec<usize> = (0..train_x.rows())
            .filter(|&i| euclidean(train_x.row(i), x) == 0.0)
            .collect();
        let w = 1.0 / matches.len() as f64;
        return WeightVector::new(matches.into_iter().map(|i| (i, w)).collect(), train_x.rows());
    }
    let h = h * LOESS_SPAN_INFLATION;
    let n = train_x.rows();
    let mut kvals = Vec::new();
    for i in 0..n {
        let kv = kernel_eval_radial(kind, euclidean(train_x.row(i), x) / h);
        if kv > 0.0 {
            kvals.push((i, kv));
        }
    }
    if kvals.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    // Xi = sum k_i (x_i - x)(x_i - x)', s = sum k_i (x_i - x).
    let mut xi = Mat::zeros(d, d);
    let mut s = vec![0.0; d];
    for &(i, kv) in &kvals {
        let row = train_x.row(i);
        for p in 0..d {
            let dp = row[p] - x[p];
            s[p] += kv * dp;
            for q in 0..d {
                xi[(p, q)] += kv * dp * (row[q] - x[q]);
            }
        }
    }
    if xi.cholesky().is_err() {
        let trace: f64 = (0..d).map(|p| xi[(p, p)]).sum();
        let ridge = 1e-8 * (1.0 + trace);
        for p in 0..d {
            xi[(p, p)] += ridge;
        }
    }
    let t = xi.solve(&s)?;
    let mut raw = Vec::with_capacity(kvals.len());
    for &(i, kv) in &kvals {
        let row = train_x.row(i);
        let mut corr = 0.0;
        for p in 0..d {
            corr += t[p] * (row[p] - x[p]);
        }
        raw.push((i, kv * (1.0 - corr)));
    }
    let total: f64 = raw.iter().map(|e| e.1).sum();
    if !total.is_finite() || total.abs() < 1e-300 {
        return Err(Error::Numerical("loess weights do not normalize".into()));
    }
    WeightVector::new(raw.into_iter().map(|(i, v)| (i, v / total)).collect(), train_x.rows())
}

/// Standardizes columns to zero mean and unit variance (constant columns are
/// left unscaled). Returns the transformed matrix with the means and scales
/// needed to map query points the same way.
pub fn standardize_columns(m: &Mat) -> (Mat, Vec<f64>, Vec<f64>) {
    let (n, d) = (m.rows(), m.cols());
    let mut means = vec![0.0; d];
    let mut scales = vec![1.0; d];
    for j in 0..d {
        let mean = (0..n).map(|i| m[(i, j)]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (m[(i, j)] - mean) * (m[(i, j)] - mean)).sum::<f64>()
            / (n as f64 - 1.0).max(1.0);
        means[j] = mean;
        if var > 0.0 {
            scales[j] = var.sqrt();
        }
    }
    let mut out = Mat::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            out[(i, j)] = (m[(i, j)] - means[j]) / scales[j];
        }
    }
    (out, means, scales)
}

/// Applies a fitted standardization to a query point.
pub fn standardize_query(x: &[f64], means: &[f64], scales: &[f64]) -> Vec<f64> {
    x.iter().zip(means).zip(scales).map(|((v, m), s)| (v - m) / s).collect()
}
