use thiserror::Error;

use crate::nets::ElementaryInterval;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("division by zero in GF({q})")]
    DivisionByZero { q: u32 },

    #[error("dimension {d} unsupported: generator construction needs d <= q+1 = {max}")]
    DimensionUnsupported { d: usize, max: usize },

    #[error("constructed point set is not a (0,{m},{d})-net in base {b}: interval {interval} holds {count} points")]
    ConstructionInvalid { b: u32, m: usize, d: usize, interval: ElementaryInterval, count: u64 },

    #[error("incompatible parameters: {0}")]
    IncompatibleParameters(String),

    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error(
        "evaluation needs {cells} cells (N^d * M) but the budget is {budget}; raise DECLUSTER_MAX_CELLS or --max-cells"
    )]
    BudgetExceeded { cells: u128, budget: u64 },

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("coloring is not latin: {0}")]
    NotLatin(String),

    #[error("unsupported scheme version {0} (expected 1)")]
    UnsupportedVersion(u64),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
