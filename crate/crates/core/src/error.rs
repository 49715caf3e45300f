use thiserror::Error;

/// Errors raised by the matrix, set and kernel layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("entry ({row}, {col}) = {value} is not a finite non-negative number")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid weights: {0}")]
    Weights(String),

    #[error("enumeration budget exceeded: {needed} products requested, cap is {cap}")]
    Budget { needed: u128, cap: usize },

    #[error("invalid kernel specification: {0}")]
    KernelSpec(String),

    #[error("invalid chain input: {0}")]
    ChainInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
