use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("invalid arithmetic function spec: {0}")]
    InvalidSpec(String),
    #[error("spec file line {line}: {message}")]
    SpecSyntax { line: usize, message: String },
    #[error("negative weight {value} at q = {q}")]
    NegativeWeight { q: u64, value: f64 },
    #[error("report serialization: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn out_of_range(
        name: &'static str,
        value: impl std::fmt::Display,
        reason: &'static str,
    ) -> Self {
        Error::OutOfRange {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
