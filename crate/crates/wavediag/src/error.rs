use thiserror::Error;

/// Errors produced by the diagnosis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A text input (CSV, config, model file) could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input is degenerate for the requested operation (e.g. a constant
    /// channel has zero standard deviation).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A serialized model file is malformed or inconsistent.
    #[error("model file error: {0}")]
    ModelFormat(String),

    /// A structured value (e.g. a wavelet pyramid) violates its invariants.
    #[error("structure error: {0}")]
    Structure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
