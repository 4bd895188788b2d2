use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mask has no zero pixel")]
    AllOnes,
    #[error("mask is all foreground or all background")]
    DegenerateMask,
    #[error("mask has no foreground pixel")]
    EmptyMask,
    #[error("gradient norm vanishes at ({row}, {col})")]
    ZeroGradient { row: usize, col: usize },
    #[error("object box covers the whole frame, no background to crop")]
    NoBackground,
    #[error("boundary field has no {0} support")]
    DegenerateField(&'static str),
    #[error("union of both operands is empty")]
    EmptyUnion,
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    Shape {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("no recorded entry for box {0:?}")]
    MissingEntry([usize; 4]),
    #[error("corrupt field file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },
    #[error("proposal budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
