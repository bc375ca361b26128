use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("element does not belong to the expected algebra")]
    AlgebraMismatch,

    #[error("block {block}: expected {expected}x{expected} matrix, got {rows}x{cols}")]
    BlockShape {
        block: usize,
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator is not self-adjoint (|x - x*| = {deviation:e})")]
    NotSelfAdjoint { deviation: f64 },

    #[error("element is not a projection (deviation {deviation:e})")]
    NotProjection { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal ratio {ratio:e})")]
    EigenNoConvergence { sweeps: usize, ratio: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("sequence exhausted after {available} terms ({requested} requested)")]
    SequenceExhausted { requested: usize, available: usize },

    #[error("invalid apparatus field `{field}`: {reason}")]
    InvalidApparatus { field: &'static str, reason: String },

    #[error("rotation orbit hit the iteration cap of {cap} steps after {found} visits")]
    IterationCap { cap: u64, found: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("index underflow: {0}")]
    IndexUnderflow(String),

    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
