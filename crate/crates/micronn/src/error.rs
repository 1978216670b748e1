use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected:?}, got {actual:?}")]
    Shape {
        context: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("batch norm needs at least 2 samples in train mode, got {0}")]
    BatchTooSmall(usize),
    #[error("non-finite value produced by layer {index} ({kind})")]
    NonFinite { index: usize, kind: &'static str },
    #[error("targets must be 0 or 1, found {0}")]
    BadTarget(f64),
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
