//! The experiment subcommands.

use crate::config::{CensoringConfig, ExperimentConfig};
use crate::harness::{
    mean_true_risk, pairwise_mean, CensoredInstance, Instance, QuerySet,
};
use crate::report::{Report, Row};
use prescriptor_core::datagen;
use prescriptor_core::erm::{erm_fit, erm_predict, ErmConfig, NormSpec};
use prescriptor_core::linalg::Mat;
use prescriptor_core::metrics::{
    coefficient_of_prescriptiveness, estimate_fixed_decision_risk,
    perfect_foresight_risk,
};
use prescriptor_core::rng::{self, purpose};
use prescriptor_core::solve::{
    make_prescription, MethodKind, Prescription, TrainData,
};
use prescriptor_core::{Error, Problem, Result};
use rayon::prelude::*;
use std::fs;
use std::path::Path;

fn fit_method(
    method: &str,
    cfg: &ExperimentConfig,
    problem: &Problem,
    data: &prescriptor_core::Dataset,
    replication: usize,
    n: usize,
) -> Result<Prescription> {
    let kind = MethodKind::parse(method)?;
    let params = cfg.params_for(method);
    make_prescription(
        kind,
        &params,
        problem,
        TrainData::Plain(data),
        false,
        rng::derive_seed(cfg.master_seed, &[purpose::TREE, replication as u64, n as u64]),
    )
}

/// Writes the generated datasets as CSV files, one per (N, replication).
pub fn cmd_gen_data(cfg: &ExperimentConfig, out: &Path) -> Result<Report> {
    let inst = Instance::build(cfg.instance)?;
    let mut rows = Vec::new();
    for &n in &cfg.sample_sizes {
        for rep in 0..cfg.replications {
            let ds = crate::harness::generate_training(
                &inst,
                n,
                rep,
                cfg.pollution_dims,
                cfg.master_seed,
            )?;
            let path = out.join(format!("{}_N{}_rep{}.csv", inst.kind.name(), n, rep));
            let mut file = fs::File::create(&path)?;
            ds.write_csv(&mut file)?;
            let mut censor_rate = None;
            if let Some(cens) = &cfg.censoring {
                if ds.y.cols() == 1 {
                    let ci = CensoredInstance::calibrate(cens.target_rate, cens.spread_factor)?;
                    let cd = ci.censor(&ds, rep, cfg.master_seed)?;
                    let cpath =
                        out.join(format!("{}_N{}_rep{}_censored.csv", inst.kind.name(), n, rep));
                    let mut cfile = fs::File::create(&cpath)?;
                    cd.write_csv(&mut cfile)?;
                    censor_rate = Some(cd.censoring_rate());
                }
            }
            rows.push(Row {
                method: "data".into(),
                n,
                replication: rep,
                pollution_dims: cfg.pollution_dims,
                censor_rate,
                true_risk: None,
                p_coeff: None,
                full_info_value: None,
            });
        }
    }
    Ok(Report::new("gen-data", inst.kind.name(), rows))
}

/// True-risk convergence toward the full-information benchmark (the
/// protocol behind the risk-versus-sample-size curves).
pub fn cmd_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    let inst = Instance::build(cfg.instance)?;
    let qs = QuerySet::generate(&inst, cfg.query_points, cfg.eval_draws, cfg.master_seed)?;
    let vstars =
        qs.full_info_values(&inst.problem, &inst.factor, cfg.oracle_draws, cfg.master_seed)?;
    let vbar = pairwise_mean(&vstars);
    let queries = qs.polluted_queries(cfg.pollution_dims, cfg.master_seed);

    let mut rows = Vec::new();
    for &n in &cfg.sample_sizes {
        for rep in 0..cfg.replications {
            let data = crate::harness::generate_training(
                &inst,
                n,
                rep,
                cfg.pollution_dims,
                cfg.master_seed,
            )?;
            for method in &cfg.methods {
                let presc = fit_method(method, cfg, &inst.problem, &data, rep, n)?;
                let risk = mean_true_risk(&qs, &inst.problem, |q| presc.prescribe(queries.row(q)))?;
                rows.push(Row {
                    method: method.clone(),
                    n,
                    replication: rep,
                    pollution_dims: cfg.pollution_dims,
                    censor_rate: None,
                    true_risk: Some(risk),
                    p_coeff: None,
                    full_info_value: Some(vbar),
                });
            }
        }
    }
    Ok(Report::new("convergence", inst.kind.name(), rows))
}

/// Pollution sweep: how performance depends on uninformative covariate
/// dimensions at fixed N.
pub fn cmd_dimension_study(cfg: &ExperimentConfig) -> Result<Report> {
    const SWEEP: [usize; 4] = [0, 4, 16, 64];
    let inst = Instance::build(cfg.instance)?;
    let n = *cfg.sample_sizes.last().expect("validated nonempty");
    let qs = QuerySet::generate(&inst, cfg.query_points, cfg.eval_draws, cfg.master_seed)?;
    let vstars =
        qs.full_info_values(&inst.problem, &inst.factor, cfg.oracle_draws, cfg.master_seed)?;
    let vbar = pairwise_mean(&vstars);

    let mut rows = Vec::new();
    for &pollution in &SWEEP {
        let queries = qs.polluted_queries(pollution, cfg.master_seed);
        for rep in 0..cfg.replications {
            let data =
                crate::harness::generate_training(&inst, n, rep, pollution, cfg.master_seed)?;
            for method in &cfg.methods {
                let presc = fit_method(method, cfg, &inst.problem, &data, rep, n)?;
                let risk = mean_true_risk(&qs, &inst.problem, |q| presc.prescribe(queries.row(q)))?;
                rows.push(Row {
                    method: method.clone(),
                    n,
                    replication: rep,
                    pollution_dims: pollution,
                    censor_rate: None,
                    true_risk: Some(risk),
                    p_coeff: None,
                    full_info_value: Some(vbar),
                });
            }
        }
    }
    Ok(Report::new("dimension-study", inst.kind.name(), rows))
}

/// Out-of-sample coefficient of prescriptiveness on fresh validation pairs.
pub fn cmd_prescriptiveness(cfg: &ExperimentConfig) -> Result<Report> {
    let inst = Instance::build(cfg.instance)?;
    let mut rows = Vec::new();
    for &n in &cfg.sample_sizes {
        for rep in 0..cfg.replications {
            let data = crate::harness::generate_training(
                &inst,
                n,
                rep,
                cfg.pollution_dims,
                cfg.master_seed,
            )?;
            let val = crate::harness::generate_validation(
                &inst,
                cfg.validation_size,
                rep,
                cfg.pollution_dims,
                cfg.master_seed,
            )?;
            let saa = fit_method("saa", cfg, &inst.problem, &data, rep, n)?;
            let saa_decision = saa.prescribe(val.x.row(0))?;
            let saa_risk = estimate_fixed_decision_risk(&saa_decision, &val, &inst.problem)?;
            let perfect = perfect_foresight_risk(&val, &inst.problem)?;
            for method in &cfg.methods {
                let (policy_risk, p) = if method == "saa" {
                    (saa_risk, coefficient_of_prescriptiveness(saa_risk, saa_risk, perfect)?)
                } else {
                    let presc = fit_method(method, cfg, &inst.problem, &data, rep, n)?;
                    let risk = parallel_validation_risk(&presc, &val, &inst.problem)?;
                    (risk, coefficient_of_prescriptiveness(risk, saa_risk, perfect)?)
                };
                rows.push(Row {
                    method: method.clone(),
                    n,
                    replication: rep,
                    pollution_dims: cfg.pollution_dims,
                    censor_rate: None,
                    true_risk: Some(policy_risk),
                    p_coeff: Some(p),
                    full_info_value: None,
                });
            }
        }
    }
    Ok(Report::new("prescriptiveness", inst.kind.name(), rows))
}

/// `estimate_risk` with the per-point prescriptions evaluated in parallel.
fn parallel_validation_risk(
    presc: &Prescription,
    val: &prescriptor_core::Dataset,
    problem: &Problem,
) -> Result<f64> {
    let costs: Vec<Result<f64>> = (0..val.len())
        .into_par_iter()
        .map(|i| {
            let z = presc.prescribe(val.x.row(i))?;
            problem.cost(&z, val.y.row(i))
        })
        .collect();
    let costs = costs.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_mean(&costs))
}

/// Kaplan-Meier corrected versus naive prescriptions on synthetically
/// censored demand (scalar newsvendor).
pub fn cmd_censoring_study(cfg: &ExperimentConfig) -> Result<Report> {
    let cens: CensoringConfig = cfg.censoring.clone().unwrap_or_default();
    let ci = CensoredInstance::calibrate(cens.target_rate, cens.spread_factor)?;
    let problem = Problem::Newsvendor(prescriptor_core::problems::NewsvendorSpec { tau: cens.tau });

    // Query points and univariate conditional evaluation draws.
    let chain = datagen::simulate_arma(
        &ci.arma,
        cfg.query_points * 40,
        rng::derive_seed(cfg.master_seed, &[purpose::QUERY]),
    )?;
    let mut queries = Mat::zeros(cfg.query_points, 3);
    for q in 0..cfg.query_points {
        queries.row_mut(q).copy_from_slice(chain.row(q * 40));
    }
    let eval_draws: Vec<Vec<f64>> = (0..cfg.query_points)
        .map(|q| {
            let full = datagen::conditional_sample(
                &ci.factor,
                queries.row(q),
                cfg.eval_draws,
                rng::derive_seed(cfg.master_seed, &[purpose::CONDITIONAL, q as u64]),
            )?;
            Ok((0..full.rows()).map(|i| full[(i, 0)]).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let nv_risk = |z: f64, draws: &[f64]| -> f64 {
        let costs: Vec<f64> = draws
            .iter()
            .map(|y| ((1.0 - cens.tau) * (z - y)).max(cens.tau * (y - z)))
            .collect();
        pairwise_mean(&costs)
    };

    let mut rows = Vec::new();
    for &n in &cfg.sample_sizes {
        for rep in 0..cfg.replications {
            let plain = ci.generate_training(n, rep, cfg.master_seed)?;
            let censored = ci.censor(&plain, rep, cfg.master_seed)?;
            let rate = censored.censoring_rate();
            for method in &cfg.methods {
                let kind = MethodKind::parse(method)?;
                let params = cfg.params_for(method);
                let seed =
                    rng::derive_seed(cfg.master_seed, &[purpose::TREE, rep as u64, n as u64]);
                for (suffix, corrected) in [("naive", false), ("km", true)] {
                    let presc = make_prescription(
                        kind,
                        &params,
                        &problem,
                        TrainData::Censored(&censored),
                        corrected,
                        seed,
                    )?;
                    let risks: Vec<Result<f64>> = (0..cfg.query_points)
                        .into_par_iter()
                        .map(|q| {
                            let z = presc.prescribe(queries.row(q))?;
                            Ok(nv_risk(z[0], &eval_draws[q]))
                        })
                        .collect();
                    let risks = risks.into_iter().collect::<Result<Vec<f64>>>()?;
                    rows.push(Row {
                        method: format!("{method}-{suffix}"),
                        n,
                        replication: rep,
                        pollution_dims: 0,
                        censor_rate: Some(rate),
                        true_risk: Some(pairwise_mean(&risks)),
                        p_coeff: None,
                        full_info_value: None,
                    });
                }
            }
        }
    }
    Ok(Report::new("censoring-study", "censored-demand", rows))
}

/// Linear-rule ERM (positive-part shipment extension) against weighted
/// prescriptions, scored on true conditional risk.
pub fn cmd_erm_study(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.instance != crate::config::InstanceKind::Shipment {
        return Err(Error::InvalidArgument("erm-study runs on the shipment instance".into()));
    }
    let inst = Instance::build(cfg.instance)?;
    let qs = QuerySet::generate(&inst, cfg.query_points, cfg.eval_draws, cfg.master_seed)?;
    let queries = qs.polluted_queries(cfg.pollution_dims, cfg.master_seed);

    let mut rows = Vec::new();
    for &n in &cfg.sample_sizes {
        for rep in 0..cfg.replications {
            let data = crate::harness::generate_training(
                &inst,
                n,
                rep,
                cfg.pollution_dims,
                cfg.master_seed,
            )?;
            // Diminishing Frobenius penalty by default.
            let lambda = cfg.erm.lambda_reg.unwrap_or(1.0 / (n as f64).sqrt());
            let norm = NormSpec::FrobeniusPenalty { lambda_reg: lambda };
            let erm_cfg = ErmConfig {
                iterations: cfg.erm.iterations,
                seed: rng::derive_seed(cfg.master_seed, &[purpose::ERM, rep as u64, n as u64]),
                ..ErmConfig::default()
            };
            let policy = erm_fit(&inst.problem, &data, &norm, &erm_cfg)?;
            let erm_risk =
                mean_true_risk(&qs, &inst.problem, |q| Ok(erm_predict(&policy, queries.row(q))))?;
            rows.push(Row {
                method: "erm".into(),
                n,
                replication: rep,
                pollution_dims: cfg.pollution_dims,
                censor_rate: None,
                true_risk: Some(erm_risk),
                p_coeff: None,
                full_info_value: None,
            });
            for method in &cfg.methods {
                let presc = fit_method(method, cfg, &inst.problem, &data, rep, n)?;
                let risk = mean_true_risk(&qs, &inst.problem, |q| presc.prescribe(queries.row(q)))?;
                rows.push(Row {
                    method: method.clone(),
                    n,
                    replication: rep,
                    pollution_dims: cfg.pollution_dims,
                    censor_rate: None,
                    true_risk: Some(risk),
                    p_coeff: None,
                    full_info_value: None,
                });
            }
        }
    }
    Ok(Report::new("erm-study", inst.kind.name(), rows))
}
