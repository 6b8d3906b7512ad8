use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} entries, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("invalid cardinality: m = {m} is not allowed for n = {n}")]
    InvalidCardinality { n: usize, m: usize },

    #[error("enumeration refused: {count} subsets exceed the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
