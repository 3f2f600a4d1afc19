use thiserror::Error;

/// Errors raised by the test engines and their inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient sample: need at least {required} observations, got {got}")]
    InsufficientSample { required: usize, got: usize },

    #[error("non-finite value at position {index}")]
    NonFiniteValue { index: usize },

    #[error("copula value out of range (-1, 1]: {0}")]
    CopulaOutOfRange(f64),

    #[error("depth overflow: index needs depth {needed}, only {available} available")]
    DepthOverflow { needed: u32, available: u32 },

    #[error("invalid depth {0}: must be between 1 and {max}", max = crate::binex::MAX_DEPTH)]
    InvalidDepth(u32),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis mismatch: weight over depths {left:?}, statistics over {right:?}")]
    BasisMismatch { left: (u32, u32), right: (u32, u32) },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too many tests: {tests} p-values but a total of only {total}")]
    TotalTestsTooSmall { tests: usize, total: usize },

    #[error("zero variance: curves carry no variation around their mean")]
    ZeroVariance,

    #[error("requested truncation k = {requested} exceeds the attainable numerical rank {attainable}")]
    RankDeficient { requested: usize, attainable: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
