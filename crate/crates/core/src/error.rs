use thiserror::Error;

/// Errors produced by the index, search, and filter layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("filter syntax error at offset {offset}: {message}")]
    FilterSyntax { offset: usize, message: String },

    #[error("filter references attribute a{attr} but only {attr_count} attributes exist")]
    AttrOutOfRange { attr: usize, attr_count: usize },

    #[error("unknown value {value:?} for categorical attribute {attr:?}")]
    UnknownCategory { attr: String, value: String },

    #[error("index is opened read-only")]
    ReadOnly,

    #[error("corrupt index: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for caller mistakes (bad arguments, bad filter text, dimension
    /// mismatches) as opposed to environment failures (I/O, corruption).
    /// The CLI maps usage errors to exit code 2 and the rest to 1.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Corrupt(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
