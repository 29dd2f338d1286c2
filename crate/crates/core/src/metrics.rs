//! Risk estimation and the coefficient of prescriptiveness.

use crate::dataset::Dataset;
use crate::error::Error;
use crate::problems::Problem;
use crate::solve::{solve_point_pred, Prescription};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Validation-set summary of a prescription's performance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RiskReport {
    pub policy_risk: f64,
    pub saa_risk: f64,
    pub perfect_foresight_risk: f64,
    pub n_validation: usize,
    pub p: f64,
}

/// Average realized cost of the prescription over the validation pairs.
pub fn estimate_risk(
    prescription: &Prescription,
    validation: &Dataset,
    problem: &Problem,
) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    let n = validation.len();
    // Pairwise reduction keeps the sum independent of evaluation order.
    let costs: Vec<f64> = (0..n)
        .map(|i| {
            let z = prescription.prescribe(validation.x.row(i))?;
            problem.cost(&z, validation.y.row(i))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_mean(&costs))
}

/// Average cost of a fixed decision over the validation pairs (the SAA
/// decision is constant in `x`).
pub fn estimate_fixed_decision_risk(
    decision: &[f64],
    validation: &Dataset,
    problem: &Problem,
) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    let costs: Vec<f64> = (0..validation.len())
        .map(|i| problem.cost(decision, validation.y.row(i)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_mean(&costs))
}

/// Deterministic perfect-foresight counterpart: per-sample inner minimum via
/// a single-scenario solve, then averaged.
pub fn perfect_foresight_risk(validation: &Dataset, problem: &Problem) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    let costs: Vec<f64> = (0..validation.len())
        .map(|i| Ok(solve_point_pred(problem, validation.y.row(i))?.objective))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_mean(&costs))
}

/// `P = 1 - (policy - perfect) / (saa - perfect)`.
pub fn coefficient_of_prescriptiveness(
    policy_risk: f64,
    saa_risk: f64,
    perfect_risk: f64,
) -> Result<f64> {
    let denom = saa_risk - perfect_risk;
    if denom.abs() < 1e-12 * (1.0 + saa_risk.abs()) {
        return Err(Error::DegeneratePrescriptiveness);
    }
    if denom < 0.0 {
        return Err(Error::InvalidArgument(
            "SAA risk below perfect-foresight risk".into(),
        ));
    }
    Ok(1.0 - (policy_risk - perfect_risk) / denom)
}

/// Order-independent mean via pairwise summation.
fn pairwise_mean(v: &[f64]) -> f64 {
    fn sum(v: &[f64]) -> f64 {
        match v.len() {
            0 => 0.0,
            1 => v[0],
            n => {
                let mid = n / 2;
                sum(&v[..mid]) + sum(&v[mid..])
            }
        }
    }
    sum(v) / v.len() as f64
}
