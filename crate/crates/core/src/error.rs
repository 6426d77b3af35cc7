use thiserror::Error;

/// Errors raised by the core pipeline stages.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate hand: {0}")]
    DegenerateHand(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("empty stroke")]
    EmptyStroke,
    #[error("degenerate stroke: {0}")]
    DegenerateStroke(String),
    #[error("repulsive source coincides with position")]
    CoincidentSource,
    #[error("anova undefined: zero between- and within-group variance")]
    DegenerateAnova,
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
