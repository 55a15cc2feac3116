use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {n} outside supported range {min}..={max}")]
    Size { n: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {reason} (min eigenvalue {min_eigenvalue:.3e})")]
    InvalidState { reason: String, min_eigenvalue: f64 },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("explicit affine representation limited to n <= {max}, got n = {n}")]
    SizeGuard { n: usize, max: usize },

    #[error("parameter count mismatch: circuit has {expected}, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("location (layer {layer}, slot {slot}) is not a parameterized gate")]
    NotParameterized { layer: usize, slot: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite objective value at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
