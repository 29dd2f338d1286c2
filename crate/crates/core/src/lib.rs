//! Data-driven predictive prescriptions.
//!
//! Turns paired covariate/outcome data `(x^i, y^i)` into decisions: local
//! learning produces per-query scenario weights, and a weighted stochastic
//! program over the training outcomes yields the prescription. The crate
//! bundles everything needed to run the synthetic benchmarks end to end:
//!
//! * [`datagen`] — ARMA covariate process, factor-model outcomes, feature
//!   pollution, and synthetic right-censoring.
//! * [`weights`] — kNN, radius-kNN, Nadaraya-Watson, recursive kernel, and
//!   local-linear (LOESS) weight functions.
//! * [`trees`] — multivariate-response regression trees and random forests
//!   with their implied binning-rule weights.
//! * [`censoring`] — conditional Kaplan-Meier weight transform for
//!   right-censored outcomes.
//! * [`problems`] — mean-CVaR portfolio, two-stage shipment planning,
//!   capacitated multi-item newsvendor, and the scalar newsvendor cost.
//! * [`lp`] — a bounded-variable revised simplex solver.
//! * [`solve`] — weighted prescriptions, SAA, point-prediction decisions,
//!   and the Monte-Carlo full-information benchmark.
//! * [`erm`] — linear decision rules fit by projected subgradient descent,
//!   with multivariate Rademacher complexity bounds.
//! * [`metrics`] — risk estimation and the coefficient of prescriptiveness.

pub mod censoring;
pub mod dataset;
pub mod datagen;
pub mod erm;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod solve;
pub mod trees;
pub mod weights;

pub use dataset::{CensoredDataset, Dataset};
pub use error::Error;
pub use linalg::Mat;
pub use lp::{LinearProgram, LpSolution, LpStatus, RowSense};
pub use problems::Problem;
pub use solve::{Prescription, SolveOutcome};
pub use weights::{KernelKind, WeightVector};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
