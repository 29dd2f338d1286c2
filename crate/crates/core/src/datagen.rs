//! Synthetic benchmark instances: an ARMA(2,2) covariate process feeding a
//! linear factor model for outcomes, plus feature pollution and synthetic
//! right-censoring.

use crate::dataset::{CensoredDataset, Dataset};
use crate::error::Error;
use crate::linalg::Mat;
use crate::rng;
use crate::Result;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Covariate dimension of the built-in instances.
pub const FACTOR_DIM: usize = 3;
/// Outcome dimension of the built-in instances.
pub const OUTCOME_DIM: usize = 12;

/// A 3-dimensional ARMA(2,2) process
/// `X(t) = Phi1 X(t-1) + Phi2 X(t-2) + U(t) + Theta1 U(t-1) + Theta2 U(t-2)`
/// with Gaussian innovations `U ~ N(0, sigma_u)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArmaSpec {
    pub phi1: Mat,
    pub phi2: Mat,
    pub theta1: Mat,
    pub theta2: Mat,
    pub sigma_u: Mat,
    pub burn_in: usize,
}

impl ArmaSpec {
    /// The market-factor process parameters of the synthetic benchmarks.
    pub fn benchmark() -> Self {
        let phi1 = Mat::from_rows(&[
            vec![0.5, -0.9, 0.0],
            vec![1.1, -0.7, 0.0],
            vec![0.0, 0.0, 0.5],
        ]);
        let phi2 = Mat::from_rows(&[
            vec![0.0, -0.5, 0.0],
            vec![-0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let theta1 = Mat::from_rows(&[
            vec![0.4, 0.8, 0.0],
            vec![-1.1, -0.3, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let theta2 = Mat::from_rows(&[
            vec![0.0, -0.8, 0.0],
            vec![-1.1, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        ArmaSpec {
            phi1,
            phi2,
            theta1,
            theta2,
            sigma_u: Self::benchmark_sigma_u(),
            burn_in: 500,
        }
    }

    /// `(Sigma_U)_{ij} = (I[i=j] 8/7 - (-1)^{i+j} / 7) * 0.05`.
    pub fn benchmark_sigma_u() -> Mat {
        let mut s = Mat::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let diag = if i == j { 8.0 / 7.0 } else { 0.0 };
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                s[(i, j)] = (diag - sign / 7.0) * 0.05;
            }
        }
        s
    }

    fn validate(&self) -> Result<Mat> {
        for (name, m) in [
            ("phi1", &self.phi1),
            ("phi2", &self.phi2),
            ("theta1", &self.theta1),
            ("theta2", &self.theta2),
            ("sigma_u", &self.sigma_u),
        ] {
            if m.rows() != 3 || m.cols() != 3 {
                return Err(Error::DimensionMismatch(format!("{name} must be 3x3")));
            }
        }
        self.sigma_u.cholesky()
    }
}

/// Simulates `n` consecutive states of the ARMA process after discarding
/// `spec.burn_in` steps from a zero initial state.
pub fn simulate_arma(spec: &ArmaSpec, n: usize, seed: u64) -> Result<Mat> {
    let chol = spec.validate()?;
    assert!(n >= 1, "n must be positive");
    let mut rng = rng::rng_from_seed(seed);
    let total = n + spec.burn_in;
    let mut x = Mat::zeros(total, 3);
    let mut u = Mat::zeros(total, 3);
    let mut g = [0.0f64; 3];
    for t in 0..total {
        for gi in g.iter_mut() {
            *gi = rng.sample(StandardNormal);
        }
        let ut = chol.matvec(&g);
        u.row_mut(t).copy_from_slice(&ut);
        let mut xt = ut;
        if t >= 1 {
            add_matvec(&mut xt, &spec.phi1, x.row(t - 1));
            add_matvec(&mut xt, &spec.theta1, u.row(t - 1));
        }
        if t >= 2 {
            add_matvec(&mut xt, &spec.phi2, x.row(t - 2));
            add_matvec(&mut xt, &spec.theta2, u.row(t - 2));
        }
        x.row_mut(t).copy_from_slice(&xt);
    }
    let mut out = Mat::zeros(n, 3);
    for t in 0..n {
        out.row_mut(t).copy_from_slice(x.row(spec.burn_in + t));
    }
    Ok(out)
}

fn add_matvec(acc: &mut [f64], m: &Mat, v: &[f64]) {
    for (i, a) in acc.iter_mut().enumerate() {
        *a += crate::linalg::dot(m.row(i), v);
    }
}

/// Which outcome transform the factor model applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    /// `Y_i = A_i^T (X + delta_i/4) + (B_i^T X) eps_i` (security returns).
    PortfolioReturns,
    /// `Y_i = 100 max{0, A_i^T (X + delta_i/4) + (B_i^T X) eps_i}` (demands).
    ShipmentDemand,
}

/// Linear factor model mapping covariates to outcome vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorModelSpec {
    /// Mean loading, `d_y x d_x`.
    pub a: Mat,
    /// Variance loading, `d_y x d_x`.
    pub b: Mat,
    pub kind: OutcomeKind,
}

impl FactorModelSpec {
    /// The 12-outcome benchmark loadings: `A = 2.5% * pattern`,
    /// `B = 7.5% * sign pattern`.
    pub fn benchmark(kind: OutcomeKind) -> Self {
        let mut a = Mat::zeros(OUTCOME_DIM, FACTOR_DIM);
        for i in 0..OUTCOME_DIM {
            for j in 0..FACTOR_DIM {
                a[(i, j)] = if i % 3 == j { 0.025 * 0.8 } else { 0.025 * 0.1 };
            }
        }
        let signs: [[f64; 3]; 12] = [
            [0.0, -1.0, -1.0],
            [-1.0, 0.0, -1.0],
            [-1.0, -1.0, 0.0],
            [0.0, -1.0, 1.0],
            [-1.0, 0.0, 1.0],
            [-1.0, 1.0, 0.0],
            [0.0, 1.0, -1.0],
            [1.0, 0.0, -1.0],
            [1.0, -1.0, 0.0],
            [0.0, 1.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 0.0],
        ];
        let mut b = Mat::zeros(OUTCOME_DIM, FACTOR_DIM);
        for i in 0..OUTCOME_DIM {
            for j in 0..FACTOR_DIM {
                b[(i, j)] = 0.075 * signs[i][j];
            }
        }
        FactorModelSpec { a, b, kind }
    }

    pub fn d_y(&self) -> usize {
        self.a.rows()
    }

    pub fn d_x(&self) -> usize {
        self.a.cols()
    }

    fn validate(&self, x_cols: usize) -> Result<()> {
        if self.b.rows() != self.a.rows() || self.b.cols() != self.a.cols() {
            return Err(Error::DimensionMismatch("A and B must have equal shape".into()));
        }
        if x_cols != self.d_x() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} columns, loadings expect {}",
                x_cols,
                self.d_x()
            )));
        }
        Ok(())
    }

    /// One outcome vector at covariate `x` with fresh idiosyncratic draws.
    fn sample_outcome<R: Rng>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        let (dy, dx) = (self.d_y(), self.d_x());
        for i in 0..dy {
            let mut mean_arg = 0.0;
            for j in 0..dx {
                let delta: f64 = rng.sample(StandardNormal);
                mean_arg += self.a[(i, j)] * (x[j] + delta / 4.0);
            }
            let eps: f64 = rng.sample(StandardNormal);
            let v = mean_arg + crate::linalg::dot(self.b.row(i), x) * eps;
            out[i] = match self.kind {
                OutcomeKind::PortfolioReturns => v,
                OutcomeKind::ShipmentDemand => 100.0 * v.max(0.0),
            };
        }
    }
}

/// Outcome matrix for every row of `x` (fresh idiosyncratic draws per row).
pub fn generate_outcomes(spec: &FactorModelSpec, x: &Mat, seed: u64) -> Result<Mat> {
    spec.validate(x.cols())?;
    let mut rng = rng::rng_from_seed(seed);
    let mut y = Mat::zeros(x.rows(), spec.d_y());
    for i in 0..x.rows() {
        let row = x.row(i).to_vec();
        spec.sample_outcome(&row, &mut rng, y.row_mut(i));
    }
    Ok(y)
}

/// `m` iid draws of `Y | X = x` under the generative model.
pub fn conditional_sample(spec: &FactorModelSpec, x: &[f64], m: usize, seed: u64) -> Result<Mat> {
    spec.validate(x.len())?;
    assert!(m >= 1, "m must be positive");
    let mut rng = rng::rng_from_seed(seed);
    let mut y = Mat::zeros(m, spec.d_y());
    for i in 0..m {
        spec.sample_outcome(x, &mut rng, y.row_mut(i));
    }
    Ok(y)
}

/// Appends `extra` columns of iid standard normals to `x`.
pub fn pollute_features(x: &Mat, extra: usize, seed: u64) -> Mat {
    if extra == 0 {
        return x.clone();
    }
    let mut rng = rng::rng_from_seed(seed);
    let mut noise = Mat::zeros(x.rows(), extra);
    for i in 0..x.rows() {
        for v in noise.row_mut(i) {
            *v = rng.sample(StandardNormal);
        }
    }
    x.hstack(&noise)
}

/// Censors a univariate-outcome dataset with thresholds
/// `V ~ N(threshold_mean, threshold_spread^2)` drawn independently of `Y`.
pub fn censor_dataset(
    dataset: &Dataset,
    threshold_mean: f64,
    threshold_spread: f64,
    seed: u64,
) -> Result<CensoredDataset> {
    if dataset.y.cols() != 1 {
        return Err(Error::CensoringMultivariate);
    }
    if threshold_spread <= 0.0 {
        return Err(Error::InvalidArgument("threshold_spread must be positive".into()));
    }
    let mut rng = rng::rng_from_seed(seed);
    let n = dataset.len();
    let mut u = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut true_y = Vec::with_capacity(n);
    for i in 0..n {
        let y = dataset.y[(i, 0)];
        let g: f64 = rng.sample(StandardNormal);
        let v = threshold_mean + threshold_spread * g;
        u.push(y.min(v));
        delta.push(y <= v);
        true_y.push(y);
    }
    Ok(CensoredDataset { x: dataset.x.clone(), u, delta, true_y: Some(true_y) })
}
