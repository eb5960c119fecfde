use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("incompatible truncation policies")]
    IncompatiblePolicy,

    #[error("cannot substitute a non-invertible value into a negative power of {0}")]
    NonInvertibleSubstitution(String),

    #[error("series has nonzero constant term {0}")]
    NonzeroConstantTerm(String),

    #[error("series has zero constant term and cannot be inverted")]
    NotInvertible,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid insertion profile: {0}")]
    InvalidGamma(String),

    #[error("expected an integer but got {0}: {1}")]
    NonInteger(String, String),

    #[error("model is not Calabi-Yau (total charge {0})")]
    NotCalabiYau(String),

    #[error("unexpected structure: {0}")]
    Structure(String),

    #[error("invalid fixed-point request: {0}")]
    InvalidVariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
