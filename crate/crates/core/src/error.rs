use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates a model assumption.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A functional or right-hand side produced a non-finite value; in the
    /// dynamics this marks the blow-up range.
    #[error("non-finite value while evaluating {what}")]
    NonFinite { what: &'static str },

    /// The requested quantity is undefined for these inputs (for example the
    /// decay bound outside the stable well).
    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("no sign change of {what} on [{lo}, {hi}] (values {f_lo}, {f_hi})")]
    NoSignChange {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
