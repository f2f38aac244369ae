use thiserror::Error;

/// Errors raised by the model when an input falls outside its domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} = {value} is out of range: {constraint}")]
    OutOfRange {
        name: &'static str,
        value: String,
        constraint: String,
    },
    #[error("{0}")]
    Undefined(&'static str),
}

impl ModelError {
    pub(crate) fn out_of_range(
        name: &'static str,
        value: impl ToString,
        constraint: impl Into<String>,
    ) -> Self {
        ModelError::OutOfRange {
            name,
            value: value.to_string(),
            constraint: constraint.into(),
        }
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
