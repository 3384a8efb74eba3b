use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input that violates an operation's precondition.
    #[error("rejected input: {0}")]
    InvalidInput(String),

    /// An iterative or quadrature routine failed to produce a usable value.
    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: &'static str, detail: String },

    /// Solver bookkeeping broke an internal invariant.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// A configuration document with one or more violations; all of them are listed.
    #[error("invalid run specification:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
