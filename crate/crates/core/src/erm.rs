//! Empirical risk minimization over linear decision rules, plus the
//! closed-form multivariate Rademacher complexity bounds that control their
//! out-of-sample behavior.
//!
//! The rule class is `z(x) = W [x; 1]` with the intercept column exempt from
//! norm restrictions. Fitting uses projected subgradient descent with an
//! `a / sqrt(t)` step whose scale is tuned by a small grid on a pilot run;
//! the best evaluated iterate is returned, so the training objective never
//! exceeds the zero policy's. Only problems with unconstrained decisions are
//! accepted: the scalar newsvendor, and shipment planning synthetically
//! extended so first-stage costs apply to the positive part of the stock.

use crate::dataset::Dataset;
use crate::error::Error;
use crate::linalg::Mat;
use crate::problems::Problem;
use crate::rng;
use crate::Result;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A linear decision rule `z(x) = W [x; 1]`, optionally clamped to its
/// positive part after evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearPolicy {
    /// `d_z x (d_x + 1)`; the last column multiplies the appended constant.
    pub w: Mat,
    pub positive_part: bool,
}

impl LinearPolicy {
    pub fn zero(d_z: usize, d_x: usize, positive_part: bool) -> Self {
        LinearPolicy { w: Mat::zeros(d_z, d_x + 1), positive_part }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self).expect("policy serializes")
    }
}

/// Evaluates the policy; clamps to the positive part when configured.
pub fn erm_predict(policy: &LinearPolicy, x: &[f64]) -> Vec<f64> {
    let d_x = policy.w.cols() - 1;
    assert_eq!(x.len(), d_x, "query dimension mismatch");
    let mut z = Vec::with_capacity(policy.w.rows());
    for i in 0..policy.w.rows() {
        let row = policy.w.row(i);
        let mut v = row[d_x];
        for j in 0..d_x {
            v += row[j] * x[j];
        }
        z.push(if policy.positive_part { v.max(0.0) } else { v });
    }
    z
}

/// Norm discipline on the linear block of `W`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormSpec {
    /// Row-wise (p, p') norm constraint `||W|| <= radius` with row scales
    /// `gamma`.
    Rowwise { p: f64, p_prime: f64, gamma: Vec<f64>, radius: f64 },
    /// Schatten p-norm constraint `||W|| <= radius`.
    Schatten { p: f64, radius: f64 },
    /// Soft penalty `lambda_reg ||W||_F^2` added to the objective
    /// (`lambda_reg = 0` leaves the class unrestricted).
    FrobeniusPenalty { lambda_reg: f64 },
}

/// Optimizer controls for [`erm_fit`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErmConfig {
    pub iterations: usize,
    pub pilot_iterations: usize,
    pub pilot_subsample: usize,
    /// Multiples of the data-driven base step tried on the pilot run.
    pub step_grid: Vec<f64>,
    /// Full-objective evaluation cadence for best-iterate tracking.
    pub eval_every: usize,
    pub seed: u64,
}

impl Default for ErmConfig {
    fn default() -> Self {
        ErmConfig {
            iterations: 750,
            pilot_iterations: 60,
            pilot_subsample: 512,
            step_grid: vec![0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0],
            eval_every: 25,
            seed: 0,
        }
    }
}

struct Workset<'a> {
    problem: &'a Problem,
    xt: Mat, // N x (d_x + 1) with appended constant
    y: &'a Mat,
    d_z: usize,
}

impl Workset<'_> {
    /// Mean cost over the index set; the synthetic shipment cost charges
    /// first-stage production on the positive part of the stock only.
    fn objective(&self, w: &Mat, idx: &[usize]) -> Result<f64> {
        let parts: Vec<Result<f64>> = idx.par_iter().map(|&i| self.sample_cost(w, i)).collect();
        let mut acc = 0.0;
        for p in parts {
            acc += p?;
        }
        Ok(acc / idx.len() as f64)
    }

    fn decide(&self, w: &Mat, i: usize) -> Vec<f64> {
        let xi = self.xt.row(i);
        (0..self.d_z).map(|r| crate::linalg::dot(w.row(r), xi)).collect()
    }

    fn sample_cost(&self, w: &Mat, i: usize) -> Result<f64> {
        let z = self.decide(w, i);
        match self.problem {
            Problem::Newsvendor(_) => self.problem.cost(&z, self.y.row(i)),
            Problem::Shipment(p) => {
                let first: f64 = z.iter().map(|v| v.max(0.0)).sum::<f64>() * p.p1;
                let (q, _) = p.recourse_value_and_gradient(&z, self.y.row(i))?;
                Ok(first + q)
            }
            _ => unreachable!(),
        }
    }

    /// Subgradient contribution of sample `i` at `w`.
    fn sample_subgradient(&self, w: &Mat, i: usize) -> Result<Mat> {
        let z = self.decide(w, i);
        let xi = self.xt.row(i);
        let gz: Vec<f64> = match self.problem {
            Problem::Newsvendor(p) => {
                let y = self.y[(i, 0)];
                vec![if z[0] >= y { 1.0 - p.tau } else { -p.tau }]
            }
            Problem::Shipment(p) => {
                let (_, gq) = p.recourse_value_and_gradient(&z, self.y.row(i))?;
                z.iter()
                    .zip(gq)
                    .map(|(zi, g)| if *zi > 0.0 { p.p1 + g } else { g })
                    .collect()
            }
            _ => unreachable!(),
        };
        let mut grad = Mat::zeros(self.d_z, xi.len());
        for (r, g) in gz.iter().enumerate() {
            if *g != 0.0 {
                for (c, xv) in xi.iter().enumerate() {
                    grad[(r, c)] = g * xv;
                }
            }
        }
        Ok(grad)
    }
}

fn project(norm: &NormSpec, w: &mut Mat) -> Result<()> {
    let d_x = w.cols() - 1;
    match norm {
        NormSpec::FrobeniusPenalty { .. } => Ok(()),
        NormSpec::Rowwise { p, gamma, radius, p_prime } => {
            if gamma.len() != w.rows() {
                return Err(Error::InvalidArgument("gamma length".into()));
            }
            let rows: Vec<f64> = (0..w.rows())
                .map(|r| gamma[r] * vector_p_norm(&w.row(r)[..d_x], *p))
                .collect();
            let total = vector_p_norm(&rows, *p_prime);
            if total > *radius && total > 0.0 {
                let f = radius / total;
                for r in 0..w.rows() {
                    for c in 0..d_x {
                        w[(r, c)] *= f;
                    }
                }
            }
            Ok(())
        }
        NormSpec::Schatten { p, radius } => {
            let svs = singular_values_linear_block(w);
            let total = vector_p_norm(&svs, *p);
            if total > *radius && total > 0.0 {
                let f = radius / total;
                for r in 0..w.rows() {
                    for c in 0..d_x {
                        w[(r, c)] *= f;
                    }
                }
            }
            Ok(())
        }
    }
}

fn vector_p_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    } else if (p - 1.0).abs() < 1e-12 {
        v.iter().map(|x| x.abs()).sum()
    } else if (p - 2.0).abs() < 1e-12 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Singular values of the non-intercept block via Jacobi eigenvalues of
/// `W W^T` (the block has at most a handful of rows).
fn singular_values_linear_block(w: &Mat) -> Vec<f64> {
    let (r, d_x) = (w.rows(), w.cols() - 1);
    let mut gram = Mat::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            let mut s = 0.0;
            for c in 0..d_x {
                s += w[(i, c)] * w[(j, c)];
            }
            gram[(i, j)] = s;
        }
    }
    let mut eig = symmetric_eigenvalues(&gram);
    for e in eig.iter_mut() {
        *e = e.max(0.0).sqrt();
    }
    eig
}

/// Cyclic Jacobi eigenvalues of a small symmetric matrix.
fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.clone();
    for _ in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-18 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

/// Fits a linear decision rule by projected subgradient descent.
pub fn erm_fit(
    problem: &Problem,
    dataset: &Dataset,
    norm: &NormSpec,
    config: &ErmConfig,
) -> Result<LinearPolicy> {
    let (d_z, positive_part) = match problem {
        Problem::Newsvendor(_) => (1, false),
        Problem::Shipment(p) => (p.d_z, true),
        _ => return Err(Error::ErmConstrainedProblem),
    };
    if dataset.y.cols() != problem.outcome_dim() {
        return Err(Error::DimensionMismatch("outcome dimension".into()));
    }
    let n = dataset.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let ones = Mat::from_vec(n, 1, vec![1.0; n]);
    let xt = dataset.x.hstack(&ones);
    let ws = Workset { problem, xt, y: &dataset.y, d_z };

    // Base step from data scale: response magnitude over covariate energy.
    let y_rms = (dataset.y.data().iter().map(|v| v * v).sum::<f64>()
        / dataset.y.data().len() as f64)
        .sqrt()
        .max(1e-9);
    let x_rms2 = ws.xt.data().iter().map(|v| v * v).sum::<f64>() / n as f64;
    let base_step = y_rms / (1.0 + x_rms2);

    // Pilot run picks the step multiple with the best final objective.
    let pilot_n = config.pilot_subsample.min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut prng = rng::stream(config.seed, &[rng::purpose::ERM]);
    for i in 0..pilot_n {
        let j = prng.gen_range(i..n);
        idx.swap(i, j);
    }
    let pilot_idx = &idx[..pilot_n];
    let mut best_step = base_step;
    let mut best_pilot = f64::INFINITY;
    for &mult in &config.step_grid {
        let step = base_step * mult;
        let (_, obj) = descend(&ws, norm, pilot_idx, step, config.pilot_iterations, 10)?;
        if obj < best_pilot {
            best_pilot = obj;
            best_step = step;
        }
    }

    let all: Vec<usize> = (0..n).collect();
    let (w, _) = descend(&ws, norm, &all, best_step, config.iterations, config.eval_every)?;
    Ok(LinearPolicy { w, positive_part })
}

/// Subgradient loop with best-evaluated-iterate tracking; the zero policy is
/// scored first, so the result is never worse than it.
fn descend(
    ws: &Workset,
    norm: &NormSpec,
    idx: &[usize],
    step0: f64,
    iterations: usize,
    eval_every: usize,
) -> Result<(Mat, f64)> {
    let (d_z, cols) = (ws.d_z, ws.xt.cols());
    let mut w = Mat::zeros(d_z, cols);
    let mut best_w = w.clone();
    let mut best_obj = penalized_objective(ws, norm, &w, idx)?;
    for t in 1..=iterations {
        let grad = batch_subgradient(ws, norm, &w, idx)?;
        let step = step0 / (t as f64).sqrt();
        for r in 0..d_z {
            for c in 0..cols {
                w[(r, c)] -= step * grad[(r, c)];
            }
        }
        project(norm, &mut w)?;
        if t % eval_every == 0 || t == iterations {
            let obj = penalized_objective(ws, norm, &w, idx)?;
            if obj < best_obj {
                best_obj = obj;
                best_w = w.clone();
            }
        }
    }

    // Polish with geometrically decaying constant steps: piecewise-linear
    // objectives have sharp minima where this converges linearly, which the
    // diminishing schedule alone cannot localize.
    let mut w = best_w.clone();
    let mut step = step0 / (iterations as f64).sqrt();
    let rounds = 10;
    let per_round = (iterations / 25).clamp(10, 40);
    for _ in 0..rounds {
        for _ in 0..per_round {
            let grad = batch_subgradient(ws, norm, &w, idx)?;
            for r in 0..d_z {
                for c in 0..cols {
                    w[(r, c)] -= step * grad[(r, c)];
                }
            }
            project(norm, &mut w)?;
        }
        let obj = penalized_objective(ws, norm, &w, idx)?;
        if obj < best_obj {
            best_obj = obj;
            best_w = w.clone();
        } else {
            w = best_w.clone();
        }
        step *= 0.5;
    }
    Ok((best_w, best_obj))
}

fn batch_subgradient(ws: &Workset, norm: &NormSpec, w: &Mat, idx: &[usize]) -> Result<Mat> {
    let (d_z, cols) = (ws.d_z, ws.xt.cols());
    let chunk = 256.max(idx.len() / 16 + 1);
    let parts: Vec<Result<Mat>> = idx
        .par_chunks(chunk)
        .map(|ids| {
            let mut g = Mat::zeros(d_z, cols);
            for &i in ids {
                let gi = ws.sample_subgradient(w, i)?;
                for r in 0..d_z {
                    for c in 0..cols {
                        g[(r, c)] += gi[(r, c)];
                    }
                }
            }
            Ok(g)
        })
        .collect();
    let mut grad = Mat::zeros(d_z, cols);
    for part in parts {
        let part = part?;
        for r in 0..d_z {
            for c in 0..cols {
                grad[(r, c)] += part[(r, c)];
            }
        }
    }
    let inv_n = 1.0 / idx.len() as f64;
    for r in 0..d_z {
        for c in 0..cols {
            grad[(r, c)] *= inv_n;
        }
    }
    if let NormSpec::FrobeniusPenalty { lambda_reg } = norm {
        if *lambda_reg > 0.0 {
            let mut out = grad;
            for r in 0..d_z {
                for c in 0..cols - 1 {
                    out[(r, c)] += 2.0 * lambda_reg * w[(r, c)];
                }
            }
            return Ok(out);
        }
    }
    Ok(grad)
}

fn penalized_objective(ws: &Workset, norm: &NormSpec, w: &Mat, idx: &[usize]) -> Result<f64> {
    let mut obj = ws.objective(w, idx)?;
    if let NormSpec::FrobeniusPenalty { lambda_reg } = norm {
        if *lambda_reg > 0.0 {
            let d_x = w.cols() - 1;
            let fro2: f64 = (0..w.rows())
                .map(|r| w.row(r)[..d_x].iter().map(|v| v * v).sum::<f64>())
                .sum();
            obj += lambda_reg * fro2;
        }
    }
    Ok(obj)
}

/// Row-wise (p, p') complexity bound `2 M R sqrt((p-1)/N) sum_k 1/gamma_k`
/// for covariates with `||x||_q <= M` (`q` conjugate to `p`).
pub fn rademacher_bound_rowwise(
    m_bound: f64,
    radius: f64,
    p: f64,
    gamma: &[f64],
    n: usize,
) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::InvalidArgument("row-wise bound needs p >= 2".into()));
    }
    if gamma.iter().any(|g| *g <= 0.0) {
        return Err(Error::InvalidArgument("gamma must be positive".into()));
    }
    let inv_gamma: f64 = gamma.iter().map(|g| 1.0 / g).sum();
    Ok(2.0 * m_bound * radius * ((p - 1.0) / n as f64).sqrt() * inv_gamma)
}

/// Schatten-p complexity bound `2 R d_z^r sqrt(E ||X||_2^2 / N)` with
/// `r = max(1 - 1/p, 1/2)`.
pub fn rademacher_bound_schatten(
    radius: f64,
    p: f64,
    d_z: usize,
    n: usize,
    second_moment: f64,
) -> Result<f64> {
    if second_moment < 0.0 {
        return Err(Error::InvalidArgument("second moment must be nonnegative".into()));
    }
    let r = if p.is_infinite() { 1.0 } else { (1.0 - 1.0 / p).max(0.5) };
    Ok(2.0 * radius * (d_z as f64).powf(r) * (1.0 / n as f64).sqrt() * second_moment.sqrt())
}

/// Out-of-sample bound `hat R + cbar sqrt(log(1/delta) / 2N) + L complexity`.
pub fn generalization_bound(
    empirical_risk: f64,
    c_bar: f64,
    lipschitz: f64,
    n: usize,
    delta: f64,
    complexity: f64,
) -> f64 {
    empirical_risk
        + c_bar * ((1.0 / delta).ln() / (2.0 * n as f64)).sqrt()
        + lipschitz * complexity
}

/// Data-driven variant with the empirical complexity:
/// `hat R + 3 cbar sqrt(log(2/delta) / 2N) + L complexity`.
pub fn empirical_generalization_bound(
    empirical_risk: f64,
    c_bar: f64,
    lipschitz: f64,
    n: usize,
    delta: f64,
    complexity: f64,
) -> f64 {
    empirical_risk
        + 3.0 * c_bar * ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
        + lipschitz * complexity
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{NewsvendorSpec, ShipmentProblem};

    #[test]
    fn rowwise_bound_hand_arithmetic() {
        let b = rademacher_bound_rowwise(1.0, 1.0, 2.0, &[1.0], 4).unwrap();
        assert!((b - 1.0).abs() < 1e-12);
        // Doubling N shrinks the bound by sqrt(2).
        let b2 = rademacher_bound_rowwise(1.0, 1.0, 2.0, &[1.0], 8).unwrap();
        assert!((b / b2 - std::f64::consts::SQRT_2).abs() < 1e-12);
        let b3 = rademacher_bound_rowwise(2.0, 0.5, 3.0, &[1.0, 2.0], 100).unwrap();
        let expect = 2.0 * 2.0 * 0.5 * (2.0f64 / 100.0).sqrt() * 1.5;
        assert!((b3 - expect).abs() < 1e-12);
        assert!(rademacher_bound_rowwise(1.0, 1.0, 1.5, &[1.0], 4).is_err());
    }

    #[test]
    fn schatten_bound_hand_arithmetic() {
        let b = rademacher_bound_schatten(1.0, 2.0, 1, 4, 1.0).unwrap();
        assert!((b - 1.0).abs() < 1e-12);
        // p = 1 hits the max clause: r = 1/2.
        let b1 = rademacher_bound_schatten(1.0, 1.0, 4, 16, 1.0).unwrap();
        assert!((b1 - 2.0 * 2.0 * 0.25).abs() < 1e-12);
        let binf = rademacher_bound_schatten(1.0, f64::INFINITY, 4, 16, 4.0).unwrap();
        assert!((binf - 4.0).abs() < 1e-12);
    }

    #[test]
    fn generalization_bound_hand_arithmetic() {
        assert_eq!(generalization_bound(1.5, 0.0, 3.0, 10, 0.5, 0.0), 1.5);
        // delta -> 1 kills the confidence term.
        let b = generalization_bound(0.0, 5.0, 0.0, 10, 1.0, 0.7);
        assert!(b.abs() < 1e-12);
        let b = generalization_bound(2.0, 1.0, 2.0, 200, 0.05, 0.1);
        let expect = 2.0 + (20.0f64.ln() / 400.0).sqrt() + 0.2;
        assert!((b - expect).abs() < 1e-12);
        let be = empirical_generalization_bound(2.0, 1.0, 2.0, 200, 0.05, 0.1);
        let expect = 2.0 + 3.0 * (40.0f64.ln() / 400.0).sqrt() + 0.2;
        assert!((be - expect).abs() < 1e-12);
    }

    #[test]
    fn bounds_monotone_in_n_and_radius() {
        let mut prev = f64::INFINITY;
        for n in [10, 100, 1000] {
            let b = rademacher_bound_rowwise(1.0, 2.0, 2.0, &[1.0, 1.0], n).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(
            rademacher_bound_schatten(2.0, 2.0, 3, 50, 1.0).unwrap()
                > rademacher_bound_schatten(1.0, 2.0, 3, 50, 1.0).unwrap()
        );
    }

    #[test]
    fn erm_rejects_constrained_problems() {
        let ds = Dataset::new(Mat::zeros(4, 1), Mat::zeros(4, 12), 0, "t").unwrap();
        let prob = Problem::Portfolio(crate::problems::PortfolioProblem {
            lambda: 0.0,
            epsilon: 0.15,
            d_y: 12,
        });
        let r = erm_fit(
            &prob,
            &ds,
            &NormSpec::FrobeniusPenalty { lambda_reg: 0.0 },
            &ErmConfig::default(),
        );
        assert!(matches!(r, Err(Error::ErmConstrainedProblem)));
    }

    #[test]
    fn intercept_only_newsvendor_fits_quantile() {
        // X constant: the optimal rule is the tau-quantile of y; for
        // tau = 0.5 that is the sample median. Oracle: grid search on the
        // pinball loss.
        let n = 101;
        let mut r = rng::rng_from_seed(7);
        let ys: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..4.0)).collect();
        let x = Mat::zeros(n, 1);
        let mut y = Mat::zeros(n, 1);
        for i in 0..n {
            y[(i, 0)] = ys[i];
        }
        let ds = Dataset::new(x, y, 7, "t").unwrap();
        let prob = Problem::Newsvendor(NewsvendorSpec { tau: 0.5 });
        let cfg = ErmConfig { iterations: 4000, eval_every: 10, ..Default::default() };
        let policy =
            erm_fit(&prob, &ds, &NormSpec::FrobeniusPenalty { lambda_reg: 0.0 }, &cfg).unwrap();
        let fitted = erm_predict(&policy, &[0.0])[0];

        let mut best = (f64::INFINITY, 0.0);
        let mut g = 0.0;
        while g <= 4.0 {
            let loss: f64 = ys.iter().map(|y| 0.5 * (g - y).abs()).sum::<f64>() / n as f64;
            if loss < best.0 {
                best = (loss, g);
            }
            g += 0.001;
        }
        assert!(
            (fitted - best.1).abs() < 1e-2,
            "fitted {fitted} vs grid median {}",
            best.1
        );
    }

    #[test]
    fn noise_free_linear_response_recovered() {
        // y = 2x exactly: zero pinball loss is attainable at slope two.
        let n = 200;
        let mut r = rng::rng_from_seed(17);
        let mut x = Mat::zeros(n, 1);
        let mut y = Mat::zeros(n, 1);
        for i in 0..n {
            let xv = r.gen_range(-1.0..1.0);
            x[(i, 0)] = xv;
            y[(i, 0)] = 2.0 * xv;
        }
        let ds = Dataset::new(x, y, 17, "t").unwrap();
        let prob = Problem::Newsvendor(NewsvendorSpec { tau: 0.7 });
        let cfg = ErmConfig { iterations: 6000, eval_every: 10, ..Default::default() };
        let policy =
            erm_fit(&prob, &ds, &NormSpec::FrobeniusPenalty { lambda_reg: 0.0 }, &cfg).unwrap();
        let z1 = erm_predict(&policy, &[1.0])[0];
        let z0 = erm_predict(&policy, &[0.0])[0];
        assert!((z1 - 2.0).abs() < 2e-3, "slope point {z1}");
        assert!(z0.abs() < 2e-3, "intercept {z0}");
    }

    #[test]
    fn shipment_zero_demand_keeps_zero_policy() {
        let n = 24;
        let mut r = rng::rng_from_seed(27);
        let mut x = Mat::zeros(n, 2);
        for i in 0..n {
            x[(i, 0)] = r.gen_range(-1.0..1.0);
            x[(i, 1)] = r.gen_range(-1.0..1.0);
        }
        let y = Mat::zeros(n, 12);
        let ds = Dataset::new(x, y, 27, "t").unwrap();
        let prob = Problem::Shipment(ShipmentProblem::benchmark());
        let cfg = ErmConfig {
            iterations: 40,
            pilot_iterations: 10,
            eval_every: 5,
            ..Default::default()
        };
        let policy =
            erm_fit(&prob, &ds, &NormSpec::FrobeniusPenalty { lambda_reg: 0.0 }, &cfg).unwrap();
        assert!(policy.positive_part);
        // Zero demand: the zero policy costs zero and best-iterate tracking
        // never loses to it.
        for i in 0..n {
            let z = erm_predict(&policy, ds.x.row(i));
            let cost = prob.cost(&z, &vec![0.0; 12]).unwrap();
            assert!(cost.abs() < 1e-9, "cost {cost}");
        }
    }

    #[test]
    fn predict_matches_hand_matrix_multiply() {
        let w = Mat::from_rows(&[vec![1.0, -2.0, 0.5], vec![0.0, 3.0, -1.0]]);
        let policy = LinearPolicy { w, positive_part: false };
        let z = erm_predict(&policy, &[2.0, 1.0]);
        assert_eq!(z, vec![2.0 - 2.0 + 0.5, 3.0 - 1.0]);
        let clamped = LinearPolicy { positive_part: true, ..policy };
        let z = erm_predict(&clamped, &[-2.0, 0.0]);
        assert_eq!(z, vec![0.0, 0.0]);
        let zero = LinearPolicy::zero(2, 2, true);
        assert_eq!(erm_predict(&zero, &[5.0, -3.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn rowwise_projection_respects_radius() {
        let mut w = Mat::from_rows(&[vec![3.0, 4.0, 9.0]]); // intercept exempt
        let norm = NormSpec::Rowwise { p: 2.0, p_prime: 1.0, gamma: vec![1.0], radius: 1.0 };
        project(&norm, &mut w).unwrap();
        let nrm = (w[(0, 0)] * w[(0, 0)] + w[(0, 1)] * w[(0, 1)]).sqrt();
        assert!((nrm - 1.0).abs() < 1e-12);
        assert_eq!(w[(0, 2)], 9.0);
    }

    #[test]
    fn schatten_projection_and_singular_values() {
        let w = Mat::from_rows(&[vec![3.0, 0.0, 1.0], vec![0.0, 4.0, -2.0]]);
        let mut svs = singular_values_linear_block(&w);
        svs.sort_by(|a, b| b.total_cmp(a));
        assert!((svs[0] - 4.0).abs() < 1e-9);
        assert!((svs[1] - 3.0).abs() < 1e-9);
        let mut wc = w.clone();
        project(&NormSpec::Schatten { p: f64::INFINITY, radius: 2.0 }, &mut wc).unwrap();
        let mut svs = singular_values_linear_block(&wc);
        svs.sort_by(|a, b| b.total_cmp(a));
        assert!(svs[0] <= 2.0 + 1e-9);
    }
}
