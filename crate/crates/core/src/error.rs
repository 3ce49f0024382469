use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Unsupported or malformed configuration (group spec, symbol params, cutoffs).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the domain of an operation (p <= 1, lambda outside the series disc, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A block that must be positive semi-definite has a negative eigenvalue.
    #[error("positivity violation: {0}")]
    Positivity(String),

    /// The alpha sequence grows: the operator is not in the Dixmier class at this order.
    #[error("not in Dixmier class at this order: {0}")]
    NotDixmierClass(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for errors caused by bad input rather than by the computation itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::Unsupported(_) | Error::Contract(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
