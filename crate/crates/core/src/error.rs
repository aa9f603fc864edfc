use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("unbound freeze variable {0}")]
    UnboundFreeze(String),

    #[error("freeze variable {0} is rebound inside its own scope")]
    Rebound(String),

    #[error("invalid time window [{a}, {b}]")]
    Window { a: f64, b: f64 },

    #[error("formula is not negation-free")]
    NotNegationFree,

    #[error("trace error: {0}")]
    Trace(String),

    #[error("formula uses dimension s{needed} but the trace has {available}")]
    Dimension { needed: usize, available: usize },

    #[error("empty trace")]
    EmptyTrace,

    #[error("index {index} out of range for trace of length {len}")]
    Index { index: usize, len: usize },

    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),

    #[error("conservative robustness range is unbounded")]
    UnboundedRange,

    #[error("generator needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
