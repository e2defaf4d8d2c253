use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("invalid assemblage: {0}")]
    InvalidAssemblage(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("enumeration of {count} strategies exceeds the limit of {limit}")]
    TooManyStrategies { count: u128, limit: u128 },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("solver failure: {0}")]
    Solver(String),
}
