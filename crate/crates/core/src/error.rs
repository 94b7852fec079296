use thiserror::Error;

use crate::ucond::LocalSet;

#[derive(Debug, Error)]
pub enum Error {
    #[error("set is not local: {0}")]
    NotLocal(String),

    #[error("values disagree in shape: {0}")]
    ShapeMismatch(String),

    #[error("Cauchy condition fails: a disjoint set {} has integral norm {norm:.6e} >= eps = {eps:.3e}", set.describe())]
    CauchyFailure {
        set: Box<LocalSet>,
        norm: f64,
        eps: f64,
    },

    #[error("multiplier has no finite declared bound")]
    UnboundedMultiplier,

    #[error("no tail oracle of the required kind: {0}")]
    NoOracle(String),

    #[error("supplied tail oracle is contradicted by probe {set}: norm {norm:.6e} >= eps = {eps:.3e}")]
    OracleViolation { set: String, norm: f64, eps: f64 },

    #[error("field values are not scalars")]
    NotScalar,

    #[error("group factor lists differ: {0:?} vs {1:?}")]
    FactorMismatch(Vec<u32>, Vec<u32>),

    #[error("function is not of positive type: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveType { min_eigenvalue: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("representation is not unitary (defect {0:.3e})")]
    RepNotUnitary(f64),

    #[error("representation is not a homomorphism (defect {0:.3e})")]
    RepNotHomomorphism(f64),

    #[error("grading violated: {0}")]
    GradingViolation(String),

    #[error("sections belong to different bundles")]
    BundleMismatch,

    #[error("value does not lie in its fiber: {0}")]
    FiberViolation(String),

    #[error("action is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("action is not a homomorphism (defect {0:.3e})")]
    NotHomomorphism(f64),

    #[error("element does not belong to this action system")]
    WorldMismatch,

    #[error("element is not positive: min eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("h is not dominated by k: min eigenvalue of k - h is {0:.3e}")]
    NotDominated(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
