use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("unknown message `{0}`")]
    UnknownMessage(String),

    #[error("consumer `{0}` has no inference/impact model")]
    NoModel(String),

    #[error("no path from `{from}` to `{to}`")]
    NoPath { from: String, to: String },

    #[error("graph too dense: more than {cap} simple paths to `{to}`")]
    GraphTooDense { to: String, cap: usize },

    #[error("operator violates disclosure bounds: {0}")]
    OperatorViolation(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("{context} does not sum to 1 (sum = {sum})")]
    NotNormalized { context: String, sum: f64 },

    #[error("degenerate threshold: r_B ({r_b}) must exceed r_A ({r_a})")]
    DegenerateThreshold { r_a: f64, r_b: f64 },

    #[error("degenerate balance: consumer 2's impact does not depend on its inference (w2(0) = w2(1))")]
    DegenerateBalance,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
