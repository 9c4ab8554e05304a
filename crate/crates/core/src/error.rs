use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to
/// name the offending argument or field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("capacity error: requested {requested} sets but the {strategy} strategy achieves at most {achieved}")]
    Capacity {
        strategy: String,
        requested: usize,
        achieved: usize,
    },
    #[error("scale error: {0}")]
    Scale(String),
    #[error("hypothesis error: {0}")]
    Hypothesis(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
