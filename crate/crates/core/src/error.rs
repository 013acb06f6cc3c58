use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge map is not total: `{0}` has no image")]
    NonTotal(String),
    #[error("invalid morphism at vertex `{vertex}`: {reason}")]
    InvalidMorphism { vertex: String, reason: String },
    #[error("bound exceeded: {what} is {actual}, limit {limit}")]
    BoundExceeded { what: String, limit: usize, actual: usize },
    #[error("endpoint mismatch: {0}")]
    Mismatch(String),
    #[error("invalid partial map: {0}")]
    InvalidMap(String),
    #[error("not a sieve: {0}")]
    NotSieve(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("inconsistent table: {0}")]
    Inconsistent(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
