use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid reading: {0}")]
    InvalidReading(String),

    #[error("unfillable gap: {0}")]
    UnfillableGap(String),

    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid forecast: {0}")]
    InvalidForecast(f64),

    #[error("insufficient history: need {need} values, have {have}")]
    InsufficientHistory { need: usize, have: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate residuals: zero variance")]
    DegenerateResiduals,

    #[error("non-physical price: {0}")]
    NonPhysicalPrice(f64),

    #[error("modes not equivalent: participation fraction is zero")]
    ModesNotEquivalent,

    #[error("no equivalent price exists: root argument {0} is not positive")]
    NoEquivalentPrice(f64),

    #[error("training set contains a single class")]
    SingleClass,

    #[error("invalid attack: {0}")]
    InvalidAttack(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig(message.into())
    }
}
