//! Prescription drivers: weighted scenario programs, SAA, point-prediction
//! decisions, and the Monte-Carlo full-information benchmark.
//!
//! `solve_weighted` is the core entry point. Each problem has a structured
//! route sized for its scenario count:
//!
//! * portfolio — the CVaR program is solved through its dual, whose basis
//!   has only `d_y + 1` rows regardless of the scenario count; the primal
//!   `(z, beta)` is recovered from the row prices and re-verified against a
//!   direct cost evaluation (with the epigraph LP as a fallback).
//! * shipment — the monolithic epigraph LP up to a modest scenario count,
//!   then a cutting-plane loop on the stock vector with exact per-scenario
//!   recourse cuts and an upper/lower-bound certificate.
//! * capacitated newsvendor — the epigraph LP at small counts, otherwise an
//!   exact greedy fill of the separable concave sales curves.
//! * scalar newsvendor — the weighted quantile.
//!
//! Negative weights (possible under local-linear weighting) route the
//! portfolio problem to a big-M branch-and-bound over the per-scenario
//! max-term indicators; other problems reject them.

use crate::censoring::{km_transform, CensoredWeightInput};
use crate::dataset::{CensoredDataset, Dataset};
use crate::datagen::FactorModelSpec;
use crate::error::Error;
use crate::linalg::{dot, Mat};
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowSense};
use crate::problems::{Problem, ShipmentProblem, WEIGHT_DROP_TOL};
use crate::rng;
use crate::trees::{fit_forest, fit_tree, Forest, RegressionTree, TreeConfig};
use crate::weights::{
    knn_weights, kr_weights, loess_weights, radius_knn_weights, recursive_kr_weights,
    standardize_columns, standardize_query, BandwidthSchedule, KernelKind, WeightVector,
};
use crate::Result;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scenario count at or below which the monolithic shipment LP is used.
const SHIPMENT_MONOLITHIC_MAX: usize = 24;
/// Scenario count at or below which the capacitated-newsvendor LP is used.
const CAPNV_MONOLITHIC_MAX: usize = 200;
const CUTTING_PLANE_TOL: f64 = 1e-9;
const CUTTING_PLANE_MAX_ITERS: usize = 600;
const OBJECTIVE_CHECK_TOL: f64 = 1e-7;

/// A solved weighted program: the decision block and its weighted objective.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub decision: Vec<f64>,
    pub objective: f64,
}

fn collect_scenarios<'a>(weights: &WeightVector, y: &'a Mat) -> Result<Vec<(f64, &'a [f64])>> {
    if weights.n_train() != y.rows() {
        return Err(Error::DimensionMismatch(format!(
            "weights over {} points, outcomes have {} rows",
            weights.n_train(),
            y.rows()
        )));
    }
    Ok(weights
        .entries()
        .iter()
        .filter(|(_, w)| w.abs() >= WEIGHT_DROP_TOL)
        .map(|&(i, w)| (w, y.row(i)))
        .collect())
}

/// Minimizes the weighted scenario cost `sum_i w_i c(z; y^i)` over the
/// problem's feasible set.
pub fn solve_weighted(problem: &Problem, weights: &WeightVector, y: &Mat) -> Result<SolveOutcome> {
    let scenarios = collect_scenarios(weights, y)?;
    if scenarios.is_empty() {
        return Err(Error::InvalidArgument("no scenarios with usable weight".into()));
    }
    solve_scenarios(problem, &scenarios)
}

/// Scenario-slice variant of [`solve_weighted`].
pub fn solve_scenarios(problem: &Problem, scenarios: &[(f64, &[f64])]) -> Result<SolveOutcome> {
    let has_negative = scenarios.iter().any(|(w, _)| *w < 0.0);
    if has_negative {
        return match problem {
            Problem::Portfolio(_) => {
                let outcome = portfolio::solve_milp(problem, scenarios)?;
                verify_outcome(problem, scenarios, outcome)
            }
            _ => Err(Error::NegativeWeightsUnsupported),
        };
    }
    let outcome = match problem {
        Problem::Portfolio(_) => portfolio::solve_nonneg(problem, scenarios)?,
        Problem::Shipment(p) => {
            if scenarios.len() <= SHIPMENT_MONOLITHIC_MAX {
                epigraph_route(problem, scenarios)?
            } else {
                shipment::solve_cutting_plane(problem, p, scenarios)?
            }
        }
        Problem::CapNewsvendor(p) => {
            if scenarios.len() <= CAPNV_MONOLITHIC_MAX {
                epigraph_route(problem, scenarios)?
            } else {
                cap_newsvendor::solve_greedy(p.d, p.capacity, scenarios)
            }
        }
        Problem::Newsvendor(p) => newsvendor_quantile(p.tau, scenarios),
    };
    verify_outcome(problem, scenarios, outcome)
}

/// Sample-average approximation: uniform weights over all rows.
pub fn solve_saa(problem: &Problem, y: &Mat) -> Result<SolveOutcome> {
    solve_weighted(problem, &WeightVector::uniform(y.rows()), y)
}

/// Point-prediction-driven decision: optimize against a single forecast
/// outcome.
pub fn solve_point_pred(problem: &Problem, y_hat: &[f64]) -> Result<SolveOutcome> {
    if y_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point forecast".into()));
    }
    solve_scenarios(problem, &[(1.0, y_hat)])
}

/// Solves the epigraph LP and reads the decision block off the solution.
fn epigraph_route(problem: &Problem, scenarios: &[(f64, &[f64])]) -> Result<SolveOutcome> {
    let lp = problem.lp_epigraph(scenarios)?;
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Numerical("epigraph LP infeasible".into())),
        LpStatus::Unbounded => return Err(Error::Numerical("epigraph LP unbounded".into())),
    }
    Ok(SolveOutcome {
        decision: sol.x[..problem.decision_dim()].to_vec(),
        objective: sol.objective,
    })
}

/// Exact weighted objective at a decision.
pub fn weighted_cost(problem: &Problem, scenarios: &[(f64, &[f64])], z: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (w, y) in scenarios {
        acc += w * problem.cost(z, y)?;
    }
    Ok(acc)
}

/// Re-derives the objective from the returned decision and fails loudly on
/// disagreement; also tidies tiny roundoff on the portfolio simplex block.
fn verify_outcome(
    problem: &Problem,
    scenarios: &[(f64, &[f64])],
    mut outcome: SolveOutcome,
) -> Result<SolveOutcome> {
    if let Problem::Portfolio(p) = problem {
        let z = &mut outcome.decision[..p.d_y];
        let mut total = 0.0;
        for v in z.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-9 {
                    return Err(Error::Numerical("portfolio weight below zero".into()));
                }
                *v = 0.0;
            }
            total += *v;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical("portfolio weights do not sum to one".into()));
        }
        for v in z.iter_mut() {
            *v /= total;
        }
    }
    let direct = weighted_cost(problem, scenarios, &outcome.decision)?;
    let scale = 1.0 + outcome.objective.abs() + direct.abs();
    if (direct - outcome.objective).abs() > OBJECTIVE_CHECK_TOL * scale {
        return Err(Error::Numerical(format!(
            "objective mismatch: solver {} vs direct {}",
            outcome.objective, direct
        )));
    }
    outcome.objective = direct;
    Ok(outcome)
}

/// Weighted tau-quantile solve for the scalar newsvendor.
fn newsvendor_quantile(tau: f64, scenarios: &[(f64, &[f64])]) -> SolveOutcome {
    let mut pts: Vec<(f64, f64)> = scenarios.iter().map(|(w, y)| (y[0], *w)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    let mut z = pts[pts.len() - 1].0;
    for &(v, w) in &pts {
        acc += w;
        if acc >= tau * total - 1e-15 {
            z = v;
            break;
        }
    }
    let objective = pts
        .iter()
        .map(|&(v, w)| w * ((1.0 - tau) * (z - v)).max(tau * (v - z)))
        .sum();
    SolveOutcome { decision: vec![z], objective }
}

mod portfolio {
    use super::*;

    fn params(problem: &Problem) -> &crate::problems::PortfolioProblem {
        match problem {
            Problem::Portfolio(p) => p,
            _ => unreachable!(),
        }
    }

    /// Nonnegative-weight solve through the dual program
    /// `max mu  s.t.  sum_i q_i y_ij + mu <= -lambda ybar_j,
    ///  sum_i q_i = 1,  0 <= q_i <= w_i / epsilon`,
    /// whose row prices carry the primal `(z, beta)`.
    pub fn solve_nonneg(problem: &Problem, scenarios: &[(f64, &[f64])]) -> Result<SolveOutcome> {
        let p = params(problem);
        let kept = problem.kept_scenarios(scenarios);
        if kept.is_empty() {
            return Err(Error::InvalidArgument("no scenarios with positive weight".into()));
        }
        let total: f64 = kept.iter().map(|(w, _)| w).sum();
        let m = kept.len();
        let d = p.d_y;

        let mut lp = LinearProgram::new(m + 1);
        for (i, (w, _)) in kept.iter().enumerate() {
            lp.set_bounds(i, 0.0, (w / total) / p.epsilon);
        }
        lp.set_bounds(m, f64::NEG_INFINITY, f64::INFINITY);
        lp.objective[m] = -1.0;
        let mut ybar = vec![0.0; d];
        for (w, y) in &kept {
            for j in 0..d {
                ybar[j] += (w / total) * y[j];
            }
        }
        for j in 0..d {
            let mut cols: Vec<(usize, f64)> =
                kept.iter().enumerate().map(|(i, (_, y))| (i, y[j])).collect();
            cols.push((m, 1.0));
            lp.add_row(RowSense::Le, -p.lambda * ybar[j], &cols);
        }
        let ones: Vec<(usize, f64)> = (0..m).map(|i| (i, 1.0)).collect();
        lp.add_row(RowSense::Eq, 1.0, &ones);

        let fallback = || epigraph_route(problem, scenarios);

        let sol = match solve_lp(&lp) {
            Ok(s) if s.status == LpStatus::Optimal => s,
            _ => return fallback(),
        };

        // Row prices of the <= rows are -z_j; the equality row price is -beta.
        let mut z: Vec<f64> = (0..d).map(|j| -sol.duals[j]).collect();
        let beta = -sol.duals[d];
        let mut sum = 0.0;
        for v in z.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-7 {
                    return fallback();
                }
                *v = 0.0;
            }
            sum += *v;
        }
        if (sum - 1.0).abs() > 1e-7 || !beta.is_finite() {
            return fallback();
        }
        for v in z.iter_mut() {
            *v /= sum;
        }
        let mut decision = z;
        decision.push(beta);
        let value = -sol.objective * total; // undo weight normalization
        let direct = weighted_cost(problem, scenarios, &decision)?;
        if (direct - value).abs() > OBJECTIVE_CHECK_TOL * (1.0 + value.abs() + direct.abs()) {
            return fallback();
        }
        Ok(SolveOutcome { decision, objective: value })
    }

    /// Branch-and-bound over the max-term indicators of negative-weight
    /// scenarios. Bounds come from the big-M relaxation with indicators in
    /// `[0, 1]`; leaves re-evaluate the true weighted cost.
    pub fn solve_milp(problem: &Problem, scenarios: &[(f64, &[f64])]) -> Result<SolveOutcome> {
        let p = params(problem);
        let d = p.d_y;
        let kept: Vec<(f64, &[f64])> = scenarios
            .iter()
            .filter(|(w, _)| w.abs() >= WEIGHT_DROP_TOL)
            .map(|(w, y)| (*w, *y))
            .collect();
        let neg_idx: Vec<usize> = (0..kept.len()).filter(|&i| kept[i].0 < 0.0).collect();
        let pos_idx: Vec<usize> = (0..kept.len()).filter(|&i| kept[i].0 >= 0.0).collect();
        let y_inf = kept
            .iter()
            .map(|(_, y)| y.iter().fold(0.0f64, |a, b| a.max(b.abs())))
            .fold(0.0f64, f64::max);
        let beta_bound = 1.0 + y_inf;
        let big_m = 1.0 + y_inf + beta_bound;

        // Shared skeleton. Vars: z (d), beta, u_i for positive scenarios,
        // then (m_i, b_i) pairs for negative scenarios.
        let n_vars = d + 1 + pos_idx.len() + 2 * neg_idx.len();
        let mut base = LinearProgram::new(n_vars);
        base.set_bounds(d, -beta_bound, beta_bound);
        let mut ybar = vec![0.0; d];
        for (w, y) in &kept {
            for j in 0..d {
                ybar[j] += w * y[j];
            }
        }
        for j in 0..d {
            base.objective[j] = -p.lambda * ybar[j];
        }
        base.objective[d] = kept.iter().map(|(w, _)| w).sum::<f64>();
        for (slot, &i) in pos_idx.iter().enumerate() {
            let (w, y) = kept[i];
            let u = d + 1 + slot;
            base.objective[u] = w / p.epsilon;
            let mut cols: Vec<(usize, f64)> = (0..d).map(|j| (j, y[j])).collect();
            cols.push((d, 1.0));
            cols.push((u, 1.0));
            base.add_row(RowSense::Ge, 0.0, &cols);
        }
        let mvar = |slot: usize| d + 1 + pos_idx.len() + 2 * slot;
        for (slot, &i) in neg_idx.iter().enumerate() {
            let (w, y) = kept[i];
            let (m_i, b_i) = (mvar(slot), mvar(slot) + 1);
            base.objective[m_i] = w / p.epsilon;
            base.set_bounds(m_i, 0.0, big_m);
            base.set_bounds(b_i, 0.0, 1.0);
            // m_i <= -z'y - beta + M (1 - b_i).
            let mut cols: Vec<(usize, f64)> = (0..d).map(|j| (j, y[j])).collect();
            cols.push((d, 1.0));
            cols.push((m_i, 1.0));
            cols.push((b_i, big_m));
            base.add_row(RowSense::Le, big_m, &cols);
            // m_i <= M b_i.
            base.add_row(RowSense::Le, 0.0, &[(m_i, 1.0), (b_i, -big_m)]);
            // Indicator consistency: b_i = 1 forces z'y + beta <= 0 and
            // b_i = 0 forces z'y + beta >= 0 (relaxed by M in between).
            let mut cols: Vec<(usize, f64)> = (0..d).map(|j| (j, y[j])).collect();
            cols.push((d, 1.0));
            cols.push((b_i, big_m));
            base.add_row(RowSense::Le, big_m, &cols);
            let mut cols: Vec<(usize, f64)> = (0..d).map(|j| (j, y[j])).collect();
            cols.push((d, 1.0));
            cols.push((b_i, big_m));
            base.add_row(RowSense::Ge, 0.0, &cols);
        }
        let simplex: Vec<(usize, f64)> = (0..d).map(|j| (j, 1.0)).collect();
        base.add_row(RowSense::Eq, 1.0, &simplex);

        let mut best: Option<SolveOutcome> = None;
        let mut stack: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
        let mut nodes = 0usize;
        while let Some(fixed) = stack.pop() {
            nodes += 1;
            if nodes > 100_000 {
                return Err(Error::Numerical("branch-and-bound node limit".into()));
            }
            let mut lp = base.clone();
            for &(slot, val) in &fixed {
                let b = mvar(slot) + 1;
                let v = if val { 1.0 } else { 0.0 };
                lp.set_bounds(b, v, v);
            }
            let sol = match solve_lp(&lp) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if sol.status != LpStatus::Optimal {
                continue; // infeasible branch
            }
            if let Some(b) = &best {
                if sol.objective >= b.objective - 1e-12 * (1.0 + b.objective.abs()) {
                    continue;
                }
            }
            let integral = neg_idx.iter().enumerate().all(|(slot, _)| {
                let v = sol.x[mvar(slot) + 1];
                v < 1e-7 || v > 1.0 - 1e-7
            });
            if integral {
                let mut decision = sol.x[..d + 1].to_vec();
                for v in decision[..d].iter_mut() {
                    *v = v.max(0.0);
                }
                let s: f64 = decision[..d].iter().sum();
                for v in decision[..d].iter_mut() {
                    *v /= s;
                }
                let objective = weighted_cost(problem, &kept, &decision)?;
                if best.as_ref().map_or(true, |b| objective < b.objective) {
                    best = Some(SolveOutcome { decision, objective });
                }
                continue;
            }
            // Most fractional indicator.
            let mut branch: Option<(usize, f64)> = None;
            for (slot, _) in neg_idx.iter().enumerate() {
                if fixed.iter().any(|(s, _)| *s == slot) {
                    continue;
                }
                let frac = (sol.x[mvar(slot) + 1] - 0.5).abs();
                if branch.map_or(true, |(_, f)| frac < f) {
                    branch = Some((slot, frac));
                }
            }
            if let Some((slot, _)) = branch {
                let mut a = fixed.clone();
                a.push((slot, true));
                let mut b = fixed;
                b.push((slot, false));
                stack.push(b);
                stack.push(a);
            }
        }
        best.ok_or_else(|| Error::Numerical("branch-and-bound found no solution".into()))
    }
}

mod shipment {
    use super::*;

    /// Kelley cutting-plane loop on the stock vector. Cuts aggregate exact
    /// per-scenario recourse duals; terminates when the bound gap closes.
    pub fn solve_cutting_plane(
        problem: &Problem,
        p: &ShipmentProblem,
        scenarios: &[(f64, &[f64])],
    ) -> Result<SolveOutcome> {
        let kept = problem.kept_scenarios(scenarios);
        let total_w: f64 = kept.iter().map(|(w, _)| w).sum();
        if kept.is_empty() || total_w <= 0.0 {
            return Err(Error::InvalidArgument("no scenarios with positive weight".into()));
        }
        let dz = p.d_z;
        // Stocking more than any scenario's total demand is never optimal.
        let z_cap = kept
            .iter()
            .map(|(_, y)| y.iter().sum::<f64>())
            .fold(0.0f64, f64::max);

        // F(z) = sum_k w_k Q(z; y^k) with an aggregated subgradient. Fixed
        // chunking keeps the reduction order independent of thread count.
        let evaluate = |z: &[f64]| -> Result<(f64, Vec<f64>)> {
            let chunks: Vec<Result<(f64, Vec<f64>)>> = kept
                .par_chunks(512)
                .map(|block| {
                    let mut value = 0.0;
                    let mut grad = vec![0.0; dz];
                    for (w, y) in block {
                        let (q, g) = p.recourse_value_and_gradient(z, y)?;
                        value += w * q;
                        for (a, b) in grad.iter_mut().zip(&g) {
                            *a += w * b;
                        }
                    }
                    Ok((value, grad))
                })
                .collect();
            let mut value = 0.0;
            let mut grad = vec![0.0; dz];
            for part in chunks {
                let (v, g) = part?;
                value += v;
                for (a, b) in grad.iter_mut().zip(&g) {
                    *a += b;
                }
            }
            Ok((value, grad))
        };

        let mut cuts: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut best: Option<SolveOutcome> = None;
        let mut z = vec![0.0; dz];
        for _ in 0..CUTTING_PLANE_MAX_ITERS {
            let (f_val, grad) = evaluate(&z)?;
            let ub = p.p1 * z.iter().sum::<f64>() + f_val;
            if best.as_ref().map_or(true, |b| ub < b.objective) {
                best = Some(SolveOutcome { decision: z.clone(), objective: ub });
            }
            cuts.push((f_val - dot(&grad, &z), grad));

            // Master: min p1 sum z + theta, theta >= every cut, theta >= 0
            // (the recourse cost is nonnegative).
            let mut master = LinearProgram::new(dz + 1);
            for i in 0..dz {
                master.objective[i] = p.p1;
                master.set_bounds(i, 0.0, z_cap);
            }
            master.objective[dz] = 1.0;
            for (intercept, grad) in &cuts {
                let mut cols: Vec<(usize, f64)> =
                    grad.iter().enumerate().map(|(i, g)| (i, -*g)).collect();
                cols.push((dz, 1.0));
                master.add_row(RowSense::Ge, *intercept, &cols);
            }
            let sol = solve_lp(&master)?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::Numerical("cutting-plane master not optimal".into()));
            }
            let lb = sol.objective;
            let best_ub = best.as_ref().map(|b| b.objective).unwrap_or(f64::INFINITY);
            if best_ub - lb <= CUTTING_PLANE_TOL * (1.0 + best_ub.abs()) {
                return Ok(best.unwrap());
            }
            z = sol.x[..dz].to_vec();
        }
        Err(Error::Numerical("cutting-plane iteration limit".into()))
    }
}

mod cap_newsvendor {
    use super::*;

    /// Exact greedy for `max sum_j G_j(z_j)` with `sum z <= K`, where each
    /// `G_j` is concave piecewise linear with breakpoints at the scenario
    /// outcomes. Segments are consumed in order of decreasing marginal value.
    pub fn solve_greedy(d: usize, capacity: f64, scenarios: &[(f64, &[f64])]) -> SolveOutcome {
        let mut segments: Vec<(f64, usize, f64)> = Vec::new(); // (slope, item, length)
        for j in 0..d {
            let mut pts: Vec<(f64, f64)> = scenarios
                .iter()
                .filter(|(w, y)| *w >= WEIGHT_DROP_TOL && y[j] > 0.0)
                .map(|(w, y)| (y[j], *w))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut tail: f64 = pts.iter().map(|p| p.1).sum();
            let mut prev = 0.0;
            let mut idx = 0;
            while idx < pts.len() {
                let v = pts[idx].0;
                let mut w_here = 0.0;
                while idx < pts.len() && pts[idx].0 == v {
                    w_here += pts[idx].1;
                    idx += 1;
                }
                segments.push((tail, j, v - prev));
                prev = v;
                tail -= w_here;
            }
        }
        // Within an item, slopes strictly decrease, so the stable order
        // (slope desc, item asc) fills item prefixes.
        segments.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut z = vec![0.0; d];
        let mut left = capacity;
        for (slope, j, len) in segments {
            if left <= 0.0 || slope <= 0.0 {
                break;
            }
            let take = len.min(left);
            z[j] += take;
            left -= take;
        }
        let objective = scenarios
            .iter()
            .map(|(w, y)| -w * z.iter().zip(*y).map(|(zi, yi)| zi.min(*yi)).sum::<f64>())
            .sum();
        SolveOutcome { decision: z, objective }
    }
}

/// Conditional outcome generator used by the full-information benchmark.
pub trait ConditionalSampler: Sync {
    fn sample(&self, x: &[f64], m: usize, seed: u64) -> Result<Mat>;
    fn outcome_dim(&self) -> usize;
}

impl ConditionalSampler for FactorModelSpec {
    fn sample(&self, x: &[f64], m: usize, seed: u64) -> Result<Mat> {
        crate::datagen::conditional_sample(self, x, m, seed)
    }

    fn outcome_dim(&self) -> usize {
        self.d_y()
    }
}

/// Always returns the same outcome; degenerate benchmark for tests.
pub struct ConstantSampler(pub Vec<f64>);

impl ConditionalSampler for ConstantSampler {
    fn sample(&self, _x: &[f64], m: usize, _seed: u64) -> Result<Mat> {
        let mut mat = Mat::zeros(m, self.0.len());
        for i in 0..m {
            mat.row_mut(i).copy_from_slice(&self.0);
        }
        Ok(mat)
    }

    fn outcome_dim(&self) -> usize {
        self.0.len()
    }
}

/// Exposes one coordinate of an inner sampler as a univariate outcome.
pub struct ColumnSampler<'a, S: ConditionalSampler> {
    pub inner: &'a S,
    pub column: usize,
}

impl<S: ConditionalSampler> ConditionalSampler for ColumnSampler<'_, S> {
    fn sample(&self, x: &[f64], m: usize, seed: u64) -> Result<Mat> {
        let full = self.inner.sample(x, m, seed)?;
        let mut out = Mat::zeros(m, 1);
        for i in 0..m {
            out[(i, 0)] = full[(i, self.column)];
        }
        Ok(out)
    }

    fn outcome_dim(&self) -> usize {
        1
    }
}

/// Full-information benchmark at a query point.
#[derive(Clone, Debug)]
pub struct FullInfoResult {
    pub decision: Vec<f64>,
    pub value: f64,
    /// Standard error of `value` estimated from half-sample refits.
    pub std_error: f64,
}

/// Approximates the full-information optimum at `x` by an equal-weight solve
/// over `m` conditional draws. The standard error comes from five
/// half-sample refits; each half-sample estimate carries twice the variance
/// of the full-sample one, hence the `sqrt(2)` scaling.
pub fn full_info_oracle<S: ConditionalSampler>(
    problem: &Problem,
    sampler: &S,
    x: &[f64],
    m: usize,
    seed: u64,
) -> Result<FullInfoResult> {
    if m < 1 {
        return Err(Error::InvalidArgument("oracle needs at least one draw".into()));
    }
    let draws = sampler.sample(x, m, rng::derive_seed(seed, &[rng::purpose::ORACLE]))?;
    let main = solve_saa(problem, &draws)?;

    let half = (m / 2).max(1);
    let refits = 5;
    let mut values = Vec::with_capacity(refits);
    for r in 0..refits {
        let mut idx: Vec<usize> = (0..m).collect();
        let mut rng = rng::stream(seed, &[rng::purpose::ORACLE, 1 + r as u64]);
        for i in 0..half {
            let j = rng.gen_range(i..m);
            idx.swap(i, j);
        }
        let mut sub = Mat::zeros(half, draws.cols());
        for (row, &i) in idx[..half].iter().enumerate() {
            sub.row_mut(row).copy_from_slice(draws.row(i));
        }
        values.push(solve_saa(problem, &sub)?.objective);
    }
    let mean = values.iter().sum::<f64>() / refits as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (refits - 1) as f64;
    let std_error = (var / 2.0).sqrt();
    Ok(FullInfoResult { decision: main.decision, value: main.objective, std_error })
}

/// Method names understood by the prescription registry.
pub const METHOD_NAMES: &[&str] = &[
    "knn",
    "radius-knn",
    "kr",
    "recursive-kr",
    "loess",
    "cart",
    "rf",
    "saa",
    "point-pred",
];

/// Hyperparameters for a prescription method; unset fields fall back to
/// sample-size driven defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodParams {
    /// Neighborhood size for knn / radius-knn / loess.
    pub k: Option<usize>,
    /// Kernel for kr / loess weights.
    pub kernel: Option<KernelKind>,
    /// Bandwidth scale constant.
    pub bandwidth_c: Option<f64>,
    /// Trees in the forest (rf, point-pred).
    pub t_count: Option<usize>,
    pub min_leaf: Option<usize>,
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    /// Standardize features before distance computations.
    pub standardize: bool,
    /// kr only: use the kNN-adaptive bandwidth `h(x) = distance to the k-th
    /// neighbor` (with `k` from the `k` field or its default schedule)
    /// instead of the fixed `h_N` schedule. Pairs naturally with a compact
    /// kernel, which keeps the scenario support near `k`.
    pub adaptive_bandwidth: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Knn,
    RadiusKnn,
    Kr,
    RecursiveKr,
    Loess,
    Cart,
    Rf,
    Saa,
    PointPred,
}

impl MethodKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "knn" => MethodKind::Knn,
            "radius-knn" => MethodKind::RadiusKnn,
            "kr" => MethodKind::Kr,
            "recursive-kr" => MethodKind::RecursiveKr,
            "loess" => MethodKind::Loess,
            "cart" => MethodKind::Cart,
            "rf" => MethodKind::Rf,
            "saa" => MethodKind::Saa,
            "point-pred" => MethodKind::PointPred,
            other => return Err(Error::UnknownMethod(other.into())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Knn => "knn",
            MethodKind::RadiusKnn => "radius-knn",
            MethodKind::Kr => "kr",
            MethodKind::RecursiveKr => "recursive-kr",
            MethodKind::Loess => "loess",
            MethodKind::Cart => "cart",
            MethodKind::Rf => "rf",
            MethodKind::Saa => "saa",
            MethodKind::PointPred => "point-pred",
        }
    }
}

/// Training data accepted by the registry.
pub enum TrainData<'a> {
    Plain(&'a Dataset),
    Censored(&'a CensoredDataset),
}

enum FittedState {
    Weighting,
    Tree(RegressionTree),
    Forest(Forest),
    Saa(SolveOutcome),
    PointPred(Forest),
}

/// A fitted predictive prescription: maps query covariates to decisions.
pub struct Prescription {
    problem: Problem,
    kind: MethodKind,
    params: MethodParams,
    state: FittedState,
    train_x: Mat,
    train_y: Mat,
    scaling: Option<(Vec<f64>, Vec<f64>)>,
    /// Censoring marks; present only on the corrected path.
    censor: Option<(Vec<f64>, Vec<bool>)>,
}

/// Default `k = min(ceil(sqrt(N)), N-1)`.
pub fn default_knn_k(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).min(n.saturating_sub(1)).max(1)
}

/// Default kernel bandwidth `h_N = c N^{-1/(d_x + 2)}`.
pub fn default_bandwidth(n: usize, d_x: usize, c: f64) -> f64 {
    c * (n as f64).powf(-1.0 / (d_x as f64 + 2.0))
}

/// Default recursive schedule `h_i = c i^{-delta}` with
/// `delta = 1/(2 d_x) - 0.01` (inside the admissible range `delta < 1/(2 d_x)`).
pub fn default_recursive_schedule(d_x: usize, c: f64) -> BandwidthSchedule {
    let delta = (1.0 / (2.0 * d_x as f64) - 0.01).max(0.01);
    BandwidthSchedule::per_point(c, delta)
}

/// Default `k = max(2 (d_x + 1), ceil(N^0.7))` for local-linear weights.
pub fn default_loess_k(n: usize, d_x: usize) -> usize {
    (2 * (d_x + 1)).max((n as f64).powf(0.7).ceil() as usize).min(n)
}

fn tree_config(params: &MethodParams, d_x: usize, seed: u64, bootstrap: bool) -> TreeConfig {
    TreeConfig {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf.unwrap_or(5),
        mtry: params.mtry.or(if bootstrap {
            Some(((d_x as f64) / 3.0).ceil() as usize)
        } else {
            None
        }),
        bootstrap,
        seed,
    }
}

/// Fits a prescription for `method` on the training data.
///
/// With `censor = true` the data must be censored (univariate): base weights
/// are computed on the observed `u`, passed through the Kaplan-Meier
/// transform, and the weighted program runs over `u`. With `censor = false`
/// censored data is used naively (`y := u`).
pub fn make_prescription(
    method: MethodKind,
    params: &MethodParams,
    problem: &Problem,
    data: TrainData,
    censor: bool,
    seed: u64,
) -> Result<Prescription> {
    let (x, y, censor_marks) = match data {
        TrainData::Plain(ds) => {
            if censor {
                return Err(Error::InvalidArgument(
                    "censoring correction requires censored training data".into(),
                ));
            }
            (ds.x.clone(), ds.y.clone(), None)
        }
        TrainData::Censored(ds) => {
            let mut y = Mat::zeros(ds.len(), 1);
            for i in 0..ds.len() {
                y[(i, 0)] = ds.u[i];
            }
            let marks = if censor { Some((ds.u.clone(), ds.delta.clone())) } else { None };
            (ds.x.clone(), y, marks)
        }
    };
    if y.cols() != problem.outcome_dim() {
        return Err(Error::DimensionMismatch(format!(
            "outcomes have {} columns, problem {} expects {}",
            y.cols(),
            problem.name(),
            problem.outcome_dim()
        )));
    }
    if censor && method == MethodKind::PointPred {
        return Err(Error::InvalidArgument(
            "censoring correction is not defined for point prediction".into(),
        ));
    }

    let (x, scaling) = if params.standardize {
        let (xs, means, scales) = standardize_columns(&x);
        (xs, Some((means, scales)))
    } else {
        (x, None)
    };

    let state = match method {
        MethodKind::Knn
        | MethodKind::RadiusKnn
        | MethodKind::Kr
        | MethodKind::RecursiveKr
        | MethodKind::Loess => FittedState::Weighting,
        MethodKind::Cart => {
            let cfg = tree_config(params, x.cols(), seed, false);
            FittedState::Tree(fit_tree(&x, &y, &cfg)?)
        }
        MethodKind::Rf => {
            let cfg = tree_config(params, x.cols(), seed, true);
            FittedState::Forest(fit_forest(&x, &y, &cfg, params.t_count.unwrap_or(100))?)
        }
        MethodKind::Saa => {
            // SAA ignores x; under censoring the uniform weights still pass
            // through the Kaplan-Meier transform.
            let outcome = match &censor_marks {
                None => solve_saa(problem, &y)?,
                Some((u, delta)) => {
                    let base = WeightVector::uniform(y.rows());
                    let corrected = km_transform(&CensoredWeightInput { base: &base, u, delta })?;
                    solve_weighted(problem, &corrected, &y)?
                }
            };
            FittedState::Saa(outcome)
        }
        MethodKind::PointPred => {
            let cfg = tree_config(params, x.cols(), seed, true);
            FittedState::PointPred(fit_forest(&x, &y, &cfg, params.t_count.unwrap_or(100))?)
        }
    };

    Ok(Prescription {
        problem: problem.clone(),
        kind: method,
        params: params.clone(),
        state,
        train_x: x,
        train_y: y,
        scaling,
        censor: censor_marks,
    })
}

impl Prescription {
    pub fn method_name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn n_train(&self) -> usize {
        self.train_x.rows()
    }

    fn query_point(&self, x: &[f64]) -> Vec<f64> {
        match &self.scaling {
            Some((means, scales)) => standardize_query(x, means, scales),
            None => x.to_vec(),
        }
    }

    /// The scenario weights this prescription uses at `x` (after any
    /// censoring correction). Point prediction has no weight representation.
    pub fn weights_at(&self, x: &[f64]) -> Result<WeightVector> {
        let xq = self.query_point(x);
        let n = self.train_x.rows();
        let d_x = self.train_x.cols();
        let base = match &self.state {
            FittedState::Weighting => match self.kind {
                MethodKind::Knn => knn_weights(
                    &self.train_x,
                    &xq,
                    self.params.k.unwrap_or_else(|| default_knn_k(n)),
                )?,
                MethodKind::RadiusKnn => radius_knn_weights(
                    &self.train_x,
                    &xq,
                    self.params.k.unwrap_or_else(|| default_knn_k(n)),
                    |d| 1.0 / (1.0 + d),
                )?,
                MethodKind::Kr => {
                    let h = if self.params.adaptive_bandwidth {
                        let k = self.params.k.unwrap_or_else(|| default_knn_k(n));
                        let nn = crate::weights::knn_indices(&self.train_x, &xq, k)?;
                        // Slight inflation keeps the k-th neighbor inside the
                        // compact kernels' support.
                        nn.last().map(|e| e.1).unwrap_or(0.0).max(1e-12) * (1.0 + 1e-9)
                    } else {
                        default_bandwidth(n, d_x, self.params.bandwidth_c.unwrap_or(1.0))
                    };
                    let default_kind = if self.params.adaptive_bandwidth {
                        KernelKind::Epanechnikov
                    } else {
                        KernelKind::Gaussian
                    };
                    kr_weights(
                        &self.train_x,
                        &xq,
                        self.params.kernel.unwrap_or(default_kind),
                        h,
                    )?
                }
                MethodKind::RecursiveKr => recursive_kr_weights(
                    &self.train_x,
                    &xq,
                    &default_recursive_schedule(d_x, self.params.bandwidth_c.unwrap_or(1.0)),
                )?,
                MethodKind::Loess => loess_weights(
                    &self.train_x,
                    &xq,
                    self.params.k.unwrap_or_else(|| default_loess_k(n, d_x)),
                    self.params.kernel.unwrap_or(KernelKind::Tricubic),
                )?,
                _ => unreachable!(),
            },
            FittedState::Tree(t) => t.weights(&xq),
            FittedState::Forest(f) => f.weights(&xq),
            FittedState::Saa(_) => WeightVector::uniform(n),
            FittedState::PointPred(_) => {
                return Err(Error::InvalidArgument(
                    "point prediction has no weight representation".into(),
                ))
            }
        };
        match &self.censor {
            None => Ok(base),
            Some((u, delta)) => km_transform(&CensoredWeightInput { base: &base, u, delta }),
        }
    }

    /// Prescribes a decision for the query covariates.
    pub fn prescribe(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.prescribe_outcome(x)?.decision)
    }

    /// Prescribes and reports the weighted training objective.
    pub fn prescribe_outcome(&self, x: &[f64]) -> Result<SolveOutcome> {
        match &self.state {
            FittedState::Saa(outcome) => Ok(outcome.clone()),
            FittedState::PointPred(f) => {
                let y_hat = f.predict(&self.query_point(x));
                solve_point_pred(&self.problem, &y_hat)
            }
            _ => {
                let w = self.weights_at(x)?;
                solve_weighted(&self.problem, &w, &self.train_y)
            }
        }
    }
}
