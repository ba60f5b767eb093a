use thiserror::Error;

use crate::model::OccurrenceKey;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown occurrence {0}")]
    UnknownOccurrence(OccurrenceKey),
    #[error("{0}")]
    Input(String),
}

impl ModelError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
