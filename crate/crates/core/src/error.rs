use thiserror::Error;

/// Errors produced by model construction, file ingest, and the analyses.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input document or a value that violates the schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// An operation was called on a model of the wrong shape.
    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    /// The exact LP would need more deterministic assignments than the cap.
    #[error("scenario too large for exact LP: {assignments} global assignments exceed cap {cap}")]
    LpCapExceeded { assignments: u128, cap: u128 },

    /// The LP solver could not produce a solution.
    #[error("linear program error: {0}")]
    Lp(String),

    /// Malformed arguments to an individual operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
