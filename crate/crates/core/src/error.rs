use thiserror::Error;

#[derive(Debug, Error)]
pub enum KaseError {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("document index {index} outside [1, {n}]")]
    Index { index: u32, n: u32 },

    #[error("document index {index} is not in the authorized set")]
    Scope { index: u32 },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("timed out waiting for {0}")]
    Timeout(String),

    #[error("audit failure at message {seq}: {rule}")]
    Audit { seq: u64, rule: String },

    #[error("invalid encoding: {0}")]
    Encoding(String),

    #[error("format error at `{path}`: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl KaseError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        KaseError::Parameter(msg.into())
    }

    pub(crate) fn encoding(msg: impl Into<String>) -> Self {
        KaseError::Encoding(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        KaseError::Protocol(msg.into())
    }

    pub fn format(path: impl Into<String>, reason: impl Into<String>) -> Self {
        KaseError::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for KaseError {
    fn from(e: serde_json::Error) -> Self {
        KaseError::Format {
            path: format!("line {} column {}", e.line(), e.column()),
            reason: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, KaseError>;
