use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("column {0} has zero norm and cannot be rescaled")]
    ZeroNormColumn(usize),

    #[error("constant vector cannot be standardized")]
    ConstantVector,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program ended with status {status:?}: {context}")]
    Lp { status: LpStatus, context: String },

    #[error("restricted LP failed at lambda1 = {lambda1} on active set {active:?}: {status:?}")]
    RestrictedLp {
        lambda1: f64,
        active: Vec<usize>,
        status: LpStatus,
    },

    #[error("path fit failed at grid position {position} (lambda1 = {lambda1}): {source}")]
    PathFit {
        position: usize,
        lambda1: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("problem has no ground-truth model attached")]
    MissingTruth,

    #[error("enumeration needs {needed} subsets, budget is {budget}; use a sampling probe instead")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("scale factors do not match the training design: {0}")]
    ScaleMismatch(String),
}
