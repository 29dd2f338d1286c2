//! Experiment configuration: JSON in, validated structs out.

use prescriptor_core::solve::{MethodKind, MethodParams};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Synthetic benchmark instances exposed by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Portfolio,
    Shipment,
    CapNewsvendor,
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::Portfolio => "portfolio",
            InstanceKind::Shipment => "shipment",
            InstanceKind::CapNewsvendor => "cap-newsvendor",
        }
    }
}

/// Synthetic censoring controls for the censoring study.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CensoringConfig {
    /// Marginal censoring probability the threshold mean is calibrated to.
    pub target_rate: f64,
    /// Threshold standard deviation as a multiple of the demand deviation.
    pub spread_factor: f64,
    /// Newsvendor service level for the censored study.
    pub tau: f64,
}

impl Default for CensoringConfig {
    fn default() -> Self {
        CensoringConfig { target_rate: 0.3, spread_factor: 2.0, tau: 0.7 }
    }
}

/// ERM optimizer knobs surfaced in the config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ErmStudyConfig {
    pub iterations: usize,
    /// Frobenius penalty; `None` defaults to `1/sqrt(N)`.
    pub lambda_reg: Option<f64>,
}

impl Default for ErmStudyConfig {
    fn default() -> Self {
        ErmStudyConfig { iterations: 750, lambda_reg: None }
    }
}

/// Top-level experiment configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub instance: InstanceKind,
    pub methods: Vec<String>,
    /// Per-method hyperparameter overrides keyed by method name.
    pub method_params: BTreeMap<String, MethodParams>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    /// Uninformative feature dimensions appended to every dataset.
    pub pollution_dims: usize,
    pub censoring: Option<CensoringConfig>,
    pub master_seed: u64,
    /// Conditional draws behind the full-information benchmark.
    pub oracle_draws: usize,
    /// Conditional draws per query point for true-risk estimation.
    pub eval_draws: usize,
    /// Fresh query points the true risks are averaged over.
    pub query_points: usize,
    pub validation_size: usize,
    pub erm: ErmStudyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            instance: InstanceKind::Portfolio,
            methods: vec!["knn".into(), "kr".into(), "cart".into(), "rf".into(), "saa".into()],
            method_params: BTreeMap::new(),
            sample_sizes: vec![64, 256, 1024, 4096],
            replications: 10,
            pollution_dims: 0,
            censoring: None,
            master_seed: 0,
            oracle_draws: 20_000,
            eval_draws: 1000,
            query_points: 50,
            validation_size: 200,
            erm: ErmStudyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.methods.is_empty() {
            return Err("methods must be nonempty".into());
        }
        for m in &self.methods {
            MethodKind::parse(m).map_err(|e| e.to_string())?;
        }
        if self.sample_sizes.is_empty() {
            return Err("sample_sizes must be nonempty".into());
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err("sample_sizes must be strictly ascending".into());
        }
        if self.replications == 0 {
            return Err("replications must be at least 1".into());
        }
        if self.query_points == 0 || self.eval_draws == 0 || self.oracle_draws == 0 {
            return Err("query_points, eval_draws and oracle_draws must be positive".into());
        }
        if let Some(c) = &self.censoring {
            if !(0.0..1.0).contains(&c.target_rate) || c.spread_factor <= 0.0 {
                return Err("censoring block out of range".into());
            }
            if !(0.0..1.0).contains(&c.tau) {
                return Err("tau must lie in (0, 1)".into());
            }
        }
        Ok(())
    }

    pub fn params_for(&self, method: &str) -> MethodParams {
        self.method_params.get(method).cloned().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.sample_sizes, cfg.sample_sizes);
    }

    #[test]
    fn rejects_unknown_method_and_bad_sizes() {
        let mut cfg = ExperimentConfig::default();
        cfg.methods = vec!["gradient-boost".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.sample_sizes = vec![256, 64];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"instance":"shipment"}"#).unwrap();
        assert_eq!(cfg.instance, InstanceKind::Shipment);
        assert_eq!(cfg.replications, 10);
    }
}
