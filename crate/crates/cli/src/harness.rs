//! Shared experiment machinery: instance construction, data generation,
//! query sets, and conditional true-risk evaluation.

use crate::config::InstanceKind;
use prescriptor_core::datagen::{
    self, simulate_arma, ArmaSpec, FactorModelSpec, OutcomeKind,
};
use prescriptor_core::linalg::Mat;
use prescriptor_core::problems::{
    CapacitatedNewsvendorProblem, PortfolioProblem, Problem, ShipmentProblem,
};
use prescriptor_core::rng::{self, purpose};
use prescriptor_core::solve::{full_info_oracle, ConditionalSampler};
use prescriptor_core::{Dataset, Error, Result};
use rayon::prelude::*;

/// Successive chain states are kept this far apart when drawing
/// approximately independent points from the stationary distribution.
const THIN: usize = 40;

/// Pilot seed behind instance-level calibrations (capacity percentile,
/// censoring thresholds); fixed so the instance does not move with the
/// experiment master seed.
const PILOT_SEED: u64 = 0x9db4_37a1;

/// A fully specified synthetic benchmark instance.
pub struct Instance {
    pub kind: InstanceKind,
    pub problem: Problem,
    pub factor: FactorModelSpec,
    pub arma: ArmaSpec,
}

impl Instance {
    pub fn build(kind: InstanceKind) -> Result<Instance> {
        let arma = ArmaSpec::benchmark();
        Ok(match kind {
            InstanceKind::Portfolio => Instance {
                kind,
                problem: Problem::Portfolio(PortfolioProblem::benchmark()),
                factor: FactorModelSpec::benchmark(OutcomeKind::PortfolioReturns),
                arma,
            },
            InstanceKind::Shipment => Instance {
                kind,
                problem: Problem::Shipment(ShipmentProblem::benchmark()),
                factor: FactorModelSpec::benchmark(OutcomeKind::ShipmentDemand),
                arma,
            },
            InstanceKind::CapNewsvendor => {
                let factor = FactorModelSpec::benchmark(OutcomeKind::ShipmentDemand);
                // Capacity at the 60th percentile of total demand on a
                // fixed-seed pilot sample.
                let x = simulate_arma(&arma, 20_000, rng::derive_seed(PILOT_SEED, &[1]))?;
                let y = datagen::generate_outcomes(&factor, &x, rng::derive_seed(PILOT_SEED, &[2]))?;
                let mut totals: Vec<f64> =
                    (0..y.rows()).map(|i| y.row(i).iter().sum()).collect();
                totals.sort_by(|a, b| a.total_cmp(b));
                let capacity = totals[(totals.len() as f64 * 0.6) as usize];
                Instance {
                    kind,
                    problem: Problem::CapNewsvendor(CapacitatedNewsvendorProblem {
                        d: factor.d_y(),
                        capacity,
                    }),
                    factor,
                    arma,
                }
            }
        })
    }

    pub fn d_x(&self) -> usize {
        self.factor.d_x()
    }
}

/// Training data for one replication: consecutive states of the covariate
/// process feeding the factor model, optionally polluted with noise columns.
pub fn generate_training(
    inst: &Instance,
    n: usize,
    replication: usize,
    pollution: usize,
    master: u64,
) -> Result<Dataset> {
    let xs = simulate_arma(
        &inst.arma,
        n,
        rng::derive_seed(master, &[purpose::ARMA, replication as u64, n as u64]),
    )?;
    let y = datagen::generate_outcomes(
        &inst.factor,
        &xs,
        rng::derive_seed(master, &[purpose::OUTCOMES, replication as u64, n as u64]),
    )?;
    let x = datagen::pollute_features(
        &xs,
        pollution,
        rng::derive_seed(master, &[purpose::POLLUTE, replication as u64, n as u64]),
    );
    Dataset::new(x, y, master, inst.kind.name())
}

/// Fresh covariate/outcome pairs for out-of-sample validation.
pub fn generate_validation(
    inst: &Instance,
    n: usize,
    replication: usize,
    pollution: usize,
    master: u64,
) -> Result<Dataset> {
    let xs = simulate_arma(
        &inst.arma,
        n,
        rng::derive_seed(master, &[purpose::VALIDATION, replication as u64, 1]),
    )?;
    let y = datagen::generate_outcomes(
        &inst.factor,
        &xs,
        rng::derive_seed(master, &[purpose::VALIDATION, replication as u64, 2]),
    )?;
    let x = datagen::pollute_features(
        &xs,
        pollution,
        rng::derive_seed(master, &[purpose::VALIDATION, replication as u64, 3]),
    );
    Dataset::new(x, y, master, inst.kind.name())
}

/// Query points with per-point conditional evaluation draws; shared across
/// methods, sample sizes, and replications so comparisons are paired.
pub struct QuerySet {
    /// Informative covariates (no pollution columns).
    pub queries: Mat,
    /// Common-random-number draws of `Y | X = x_q` per query.
    pub eval_draws: Vec<Mat>,
}

impl QuerySet {
    pub fn generate(inst: &Instance, n_queries: usize, eval_draws: usize, master: u64) -> Result<Self> {
        let chain = simulate_arma(
            &inst.arma,
            n_queries * THIN,
            rng::derive_seed(master, &[purpose::QUERY]),
        )?;
        let mut queries = Mat::zeros(n_queries, inst.d_x());
        for q in 0..n_queries {
            queries.row_mut(q).copy_from_slice(chain.row(q * THIN));
        }
        let draws = (0..n_queries)
            .map(|q| {
                datagen::conditional_sample(
                    &inst.factor,
                    queries.row(q),
                    eval_draws,
                    rng::derive_seed(master, &[purpose::CONDITIONAL, q as u64]),
                )
            })
            .collect::<Result<Vec<Mat>>>()?;
        Ok(QuerySet { queries, eval_draws: draws })
    }

    pub fn len(&self) -> usize {
        self.queries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Query covariates padded with deterministic noise coordinates so they
    /// match the pollution applied to the training data.
    pub fn polluted_queries(&self, pollution: usize, master: u64) -> Mat {
        datagen::pollute_features(
            &self.queries,
            pollution,
            rng::derive_seed(master, &[purpose::QUERY, 1]),
        )
    }

    /// Conditional expected cost of decision `z` at query `q`.
    pub fn conditional_risk(&self, problem: &Problem, q: usize, z: &[f64]) -> Result<f64> {
        let draws = &self.eval_draws[q];
        let costs: Vec<f64> = (0..draws.rows())
            .map(|i| problem.cost(z, draws.row(i)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_mean(&costs))
    }

    /// Full-information benchmark values (and their mean) over the queries.
    pub fn full_info_values<S: ConditionalSampler>(
        &self,
        problem: &Problem,
        sampler: &S,
        oracle_draws: usize,
        master: u64,
    ) -> Result<Vec<f64>> {
        let results: Vec<Result<f64>> = (0..self.len())
            .into_par_iter()
            .map(|q| {
                let res = full_info_oracle(
                    problem,
                    sampler,
                    self.queries.row(q),
                    oracle_draws,
                    rng::derive_seed(master, &[purpose::ORACLE, q as u64]),
                )?;
                Ok(res.value)
            })
            .collect();
        results.into_iter().collect()
    }
}

/// Mean conditional risk of a per-query decision map, evaluated in parallel
/// over queries with an order-independent reduction.
pub fn mean_true_risk<F>(qs: &QuerySet, problem: &Problem, decide: F) -> Result<f64>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let risks: Vec<Result<f64>> = (0..qs.len())
        .into_par_iter()
        .map(|q| {
            let z = decide(q)?;
            qs.conditional_risk(problem, q, &z)
        })
        .collect();
    let risks = risks.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_mean(&risks))
}

/// Order-independent mean via pairwise summation.
pub fn pairwise_mean(v: &[f64]) -> f64 {
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

/// Univariate demand instance for the censoring study: the first shipment
/// demand coordinate under the scalar newsvendor cost.
pub struct CensoredInstance {
    pub factor: FactorModelSpec,
    pub arma: ArmaSpec,
    pub threshold_mean: f64,
    pub threshold_spread: f64,
}

impl CensoredInstance {
    /// Calibrates the Gaussian threshold on a fixed-seed pilot sample:
    /// spread is a multiple of the demand deviation and the mean is bisected
    /// to the target marginal censoring rate.
    pub fn calibrate(target_rate: f64, spread_factor: f64) -> Result<CensoredInstance> {
        let arma = ArmaSpec::benchmark();
        let factor = FactorModelSpec::benchmark(OutcomeKind::ShipmentDemand);
        let n = 20_000;
        let x = simulate_arma(&arma, n, rng::derive_seed(PILOT_SEED, &[11]))?;
        let yfull = datagen::generate_outcomes(&factor, &x, rng::derive_seed(PILOT_SEED, &[12]))?;
        let y: Vec<f64> = (0..n).map(|i| yfull[(i, 0)]).collect();
        let mean = pairwise_mean(&y);
        let sd = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        let spread = spread_factor * sd;
        // P(Y > m + s G) is monotone decreasing in m; bisect on a fixed
        // Gaussian panel.
        let gmat =
            datagen::pollute_features(&Mat::zeros(n, 0), 1, rng::derive_seed(PILOT_SEED, &[13]));
        let gs: Vec<f64> = (0..n).map(|i| gmat[(i, 0)]).collect();
        let rate_at = |m: f64| -> f64 {
            let c = y.iter().zip(&gs).filter(|(yi, g)| **yi > m + spread * **g).count();
            c as f64 / n as f64
        };
        let (mut lo, mut hi) = (-10.0 * (1.0 + sd) - spread * 6.0, 100.0 * (1.0 + sd) + spread * 6.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rate_at(mid) > target_rate {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(CensoredInstance {
            factor,
            arma,
            threshold_mean: 0.5 * (lo + hi),
            threshold_spread: spread,
        })
    }

    /// Univariate training demands at the first location.
    pub fn generate_training(&self, n: usize, replication: usize, master: u64) -> Result<Dataset> {
        let x = simulate_arma(
            &self.arma,
            n,
            rng::derive_seed(master, &[purpose::ARMA, replication as u64, n as u64]),
        )?;
        let yfull = datagen::generate_outcomes(
            &self.factor,
            &x,
            rng::derive_seed(master, &[purpose::OUTCOMES, replication as u64, n as u64]),
        )?;
        let mut y = Mat::zeros(n, 1);
        for i in 0..n {
            y[(i, 0)] = yfull[(i, 0)];
        }
        Dataset::new(x, y, master, "censored-demand")
    }

    pub fn censor(
        &self,
        ds: &Dataset,
        replication: usize,
        master: u64,
    ) -> Result<prescriptor_core::CensoredDataset> {
        datagen::censor_dataset(
            ds,
            self.threshold_mean,
            self.threshold_spread,
            rng::derive_seed(master, &[purpose::CENSOR, replication as u64]),
        )
    }
}

/// Maps a training-time error into the shared error type with context.
pub fn numerical_context(e: Error, what: &str) -> Error {
    match e {
        Error::Numerical(msg) => Error::Numerical(format!("{what}: {msg}")),
        other => other,
    }
}
