use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty graph")]
    EmptyGraph,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("degenerate marginal: support has {support} node(s), need at least 2")]
    DegenerateMarginal { support: usize },

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("index {index} out of range 1..={max}")]
    Index { index: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cannot read input: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 2 for bad usage or input, 1 for internal and
    /// output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::DimensionMismatch(_) | Error::Index { .. } => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
