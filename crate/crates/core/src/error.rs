use thiserror::Error;

pub type Result<T> = std::result::Result<T, OrliczError>;

#[derive(Debug, Error)]
pub enum OrliczError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("evaluation of {what} failed at t = {t:e}")]
    Evaluation { what: String, t: f64 },

    #[error("point ({alpha}, {eta}) outside the domain (-1/2, 1/2) x (1/8, 2)")]
    Domain { alpha: f64, eta: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("root finder did not converge: {0}")]
    NotConverged(String),

    #[error("hypothesis violated: {}", .0.join("; "))]
    HypothesisViolation(Vec<String>),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("degenerate budget: {0}")]
    DegenerateBudget(String),

    #[error("value not representable in double precision: {0}")]
    Unrepresentable(String),

    #[error("no sign of alpha certifies the separation: {0}")]
    Counterexample(String),

    #[error("not an embedding: {0}")]
    NotAnEmbedding(String),

    #[error("distinct images share basis index {index}")]
    DistinctnessViolation { index: usize },

    #[error("alignment impossible: {0}")]
    AlignmentImpossible(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl OrliczError {
    pub fn violation(msg: impl Into<String>) -> Self {
        OrliczError::HypothesisViolation(vec![msg.into()])
    }
}
