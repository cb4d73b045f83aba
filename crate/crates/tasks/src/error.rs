use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("alphabet of size {alphabet} cannot hold {n} distinct keys")]
    AlphabetTooSmall { n: usize, alphabet: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid monoid: {0}")]
    InvalidMonoid(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("record parse error on line {line}: {reason}")]
    Record { line: usize, reason: String },
}
