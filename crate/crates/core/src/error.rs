use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid innovation covariance")]
    InvalidInnovationCovariance,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("censoring supports univariate outcomes only")]
    CensoringMultivariate,

    #[error("k exceeds sample size")]
    KExceedsSampleSize,

    #[error("empty neighborhood at query point")]
    EmptyNeighborhood,

    #[error("Kaplan-Meier transform requires nonnegative weights")]
    NegativeKaplanMeierWeights,

    #[error("epigraph formulation invalid for negative weights")]
    NegativeWeightEpigraph,

    #[error("negative weights unsupported for this problem")]
    NegativeWeightsUnsupported,

    #[error("ERM supports unconstrained decision spaces only")]
    ErmConstrainedProblem,

    #[error("SAA already perfect; P undefined")]
    DegeneratePrescriptiveness,

    #[error("unknown method name: {0}")]
    UnknownMethod(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
