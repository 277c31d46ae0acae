use thiserror::Error;

/// Errors raised by the packing library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A weight definition is malformed (bad parameters, unsorted breakpoints, ...).
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    /// The weight could not be placed in the admissible class.
    #[error("classification error: {clause} fails on segment [{lo}, {hi}]: {detail}")]
    Classification {
        clause: String,
        lo: f64,
        hi: f64,
        detail: String,
    },

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A certified sign change or bound check failed numerically.
    #[error("certification error: {0}")]
    Certification(String),

    #[error("no packing density known for dimension {d}; supply one with a density override")]
    MissingDensity { d: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    /// A result contradicts a proven bound; indicates a bug.
    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
