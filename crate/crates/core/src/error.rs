use thiserror::Error;

/// Every failure the engine can report. The CLI maps variants onto exit codes.
#[derive(Debug, Error)]
pub enum ErgmError {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid dyad ({tail}, {head}): {reason}")]
    Dyad {
        tail: usize,
        head: usize,
        reason: &'static str,
    },

    #[error("network: {0}")]
    Network(String),

    #[error("attribute: {0}")]
    Attr(String),

    #[error("term `{term}`: {msg}")]
    Term { term: String, msg: String },

    #[error("constraint: {0}")]
    Constraint(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sampler: {0}")]
    Sampler(String),

    #[error("estimation: {0}")]
    Estimation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ErgmError {
    pub(crate) fn term(term: impl Into<String>, msg: impl Into<String>) -> Self {
        ErgmError::Term {
            term: term.into(),
            msg: msg.into(),
        }
    }

    /// True for failures that stem from malformed user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            ErgmError::Parse { .. }
                | ErgmError::Dyad { .. }
                | ErgmError::Network(_)
                | ErgmError::Attr(_)
                | ErgmError::Term { .. }
                | ErgmError::Constraint(_)
                | ErgmError::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, ErgmError>;
