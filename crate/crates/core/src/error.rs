use thiserror::Error;

/// Errors produced by the estimation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid distribution: {0}")]
    Validation(String),

    #[error("condition {condition} has zero probability")]
    UndefinedCondition { condition: usize },

    #[error("missing row for condition tuple {tuple:?}")]
    MissingRow { tuple: Vec<usize> },

    #[error("insufficient data: need at least {required} samples, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("symbol {symbol} at position {position} is outside the declared alphabet of size {cardinality}")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        cardinality: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
