use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ExpError>;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ExpError {
    /// Process exit code: 2 config, 3 data (including i/o), 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) => 2,
            ExpError::Data(_) | ExpError::Io { .. } => 3,
            ExpError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExpError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<cds_core::Error> for ExpError {
    fn from(e: cds_core::Error) -> Self {
        use cds_core::Error as E;
        match e {
            E::InvalidConfig(_) => ExpError::Config(e.to_string()),
            E::DimensionMismatch { .. }
            | E::NonFinite(_)
            | E::ZeroNormColumn(_)
            | E::ConstantVector
            | E::ScaleMismatch(_)
            | E::MissingTruth
            | E::BudgetExceeded { .. }
            | E::InvalidArgument(_) => ExpError::Data(e.to_string()),
            E::Lp { .. } | E::RestrictedLp { .. } | E::PathFit { .. } | E::Singular(_) => {
                ExpError::Numerical(e.to_string())
            }
        }
    }
}

impl From<csv::Error> for ExpError {
    fn from(e: csv::Error) -> Self {
        ExpError::Data(e.to_string())
    }
}
