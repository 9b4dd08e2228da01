use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("horizon too short: {0}")]
    Horizon(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("truncation tail too large: {0}")]
    Tail(String),
    #[error("division error: f̂ vanishes on K (min |f̂| = {min:.3e} < {eps:.1e}); the Wiener division needs f̂ ≠ 0 on the compact set K")]
    Division { min: f64, eps: f64 },
    #[error("growth exponent mismatch: {0}")]
    Growth(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
