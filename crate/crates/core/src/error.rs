use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("no unique minimizer: {0}")]
    Nonunique(String),
    #[error("optimizer did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("inconsistent diagram: {0}")]
    InvalidDiagram(String),
    #[error("no generic projection among {0} candidate directions")]
    NotGeneric(usize),
    #[error("unknown lemma id `{0}`")]
    UnknownLemma(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
