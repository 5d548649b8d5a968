use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cyclotomic conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u64, u64),

    #[error("polynomial is not monic")]
    NotMonic,

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("input expansion is missing required indices: {0:?}")]
    MissingIndices(Vec<String>),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ideals belong to different fields")]
    FieldMismatch,

    #[error("ideal is not prime")]
    NotPrime,

    #[error("torus table is not a group action: {0}")]
    NotGroupAction(String),

    #[error("basis is linearly dependent (dependency on element {0})")]
    DependentBasis(usize),

    #[error("operator does not stabilize the basis span (residual at index {0})")]
    UnstableSpan(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
