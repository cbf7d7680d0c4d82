use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value encountered: {0}")]
    Numeric(String),
    #[error("SVD failed to converge after {sweeps} sweeps (off-diagonal measure {off_diagonal:e})")]
    Convergence { sweeps: usize, off_diagonal: f64 },
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format { .. } | Error::Io(_) => 3,
            Error::Numeric(_) | Error::Convergence { .. } => 4,
            _ => 2,
        }
    }
}
