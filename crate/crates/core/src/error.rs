use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("slot ({row}, {col}) has multiplicity {multiplicity} > lifting factor {lifting}")]
    MultiplicityExceedsLifting {
        row: usize,
        col: usize,
        multiplicity: u32,
        lifting: usize,
    },

    #[error("numerical consistency violated: {0}")]
    Numerical(String),

    #[error("no plateau found: {0}")]
    NoPlateau(String),

    #[error("density evolution did not converge at eps = {epsilon}")]
    DidNotConverge { epsilon: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
