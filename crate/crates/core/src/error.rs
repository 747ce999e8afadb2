use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exact oracle refuses {nodes} nodes (limit {limit})")]
    OracleScaleExceeded { nodes: usize, limit: usize },

    #[error("exact oracle refuses {paths} candidate paths (limit {limit})")]
    PathBudgetExceeded { paths: usize, limit: usize },

    #[error("routing failure: cell ({i}, {j}) is empty")]
    EmptyCell { i: usize, j: usize },

    #[error("no traffic: maximum link load is zero")]
    NoTraffic,

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid network file: {0}")]
    InvalidNetwork(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
