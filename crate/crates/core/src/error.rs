use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet must be nonempty")]
    EmptyAlphabet,
    #[error("duplicate label `{0}` in alphabet")]
    DuplicateLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative or non-finite probability {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    SumNotOne(f64),
    #[error("row {row} sums to {sum}, expected 1")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("symbol `{0}` has zero marginal probability")]
    DeadSymbol(String),
    #[error("alpha = {0} is outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("invalid distortion matrix: {0}")]
    InvalidDistortion(String),
    #[error("linear program infeasible for s = `{0}`")]
    LpInfeasible(String),
    #[error("linear program failed: {0}")]
    Lp(#[from] crate::lp::LpError),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("empty input")]
    EmptyInput,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
