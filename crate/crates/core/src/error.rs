use thiserror::Error;

/// Errors raised by the geometry pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no contexts")]
    NoContexts,

    #[error("vocabulary needs at least 2 tokens, got {0}")]
    VocabularyTooSmall(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid support matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("lanczos did not converge within {steps} steps (worst residual {worst:.3e})")]
    NonConvergence {
        steps: usize,
        worst: f64,
        residuals: Vec<f64>,
    },

    #[error("dense oracle limited to min dimension 2048, got {0}")]
    TooLarge(usize),

    #[error("non-finite value in input matrix")]
    NonFinite,

    #[error("concept index {index} out of range 1..={rank}")]
    UnknownConcept { index: usize, rank: usize },

    #[error("duplicate concept dimension {0}")]
    DuplicateDim(usize),

    #[error("k must be a power of two and at least 2, got {0}")]
    NotPowerOfTwo(usize),

    #[error("step size too large: loss went from {prev:.6e} to {next:.6e}")]
    Divergence { prev: f64, next: f64 },

    #[error("embedding dimension {d} is smaller than rank {r}")]
    DimTooSmall { d: usize, r: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
