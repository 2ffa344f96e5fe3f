use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("tuple does not fit the schema: {0}")]
    SchemaMismatch(String),

    #[error("invalid ranking function: {0}")]
    InvalidRanking(String),

    #[error("ranking function is not monotone")]
    NotMonotone,

    #[error("unsupported by this interface: {0}")]
    Unsupported(String),

    #[error(
        "{count} tuples are identical on every attribute and cannot be told apart by any query"
    )]
    Indistinguishable { count: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
