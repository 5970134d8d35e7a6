use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate form: {0}")]
    Degenerate(String),
    #[error("not an even lattice: {0}")]
    NotEven(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("zero vector")]
    ZeroVector,
    #[error("not isotropic: {0}")]
    NotIsotropic(String),
    #[error("lattice is missing the marked vector `{0}`")]
    MissingMark(&'static str),
    #[error("not an isometry: {0}")]
    NotIsometry(String),
    #[error("not integral: {0}")]
    NotIntegral(String),
    #[error("p must be a prime > 3 (got {0})")]
    BadPrime(i64),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
