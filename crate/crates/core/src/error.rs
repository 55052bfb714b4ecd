use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed benchmark or instance text. `line` is 1-based, 0 when unknown.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("request {request}: {msg}")]
    Tightening { request: u32, msg: String },

    #[error("unknown location {0}")]
    UnknownLocation(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid model request: {0}")]
    Model(String),

    #[error("instance exceeds oracle limit: {n} requests, limit is {limit}")]
    OracleLimit { n: usize, limit: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("cannot decode solver assignment: {0}")]
    Import(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
