use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input: bad dimensions, non-prime modulus,
    /// unknown node names and the like.
    #[error("input error: {0}")]
    Input(String),

    /// A constructor declined to build a scheme for the given instance.
    #[error("refused: {0}")]
    Refusal(String),

    /// A search ran past its configured work limit. `best` carries the best
    /// value found before giving up, when there is one.
    #[error("budget exceeded: {reason}")]
    Budget { reason: String, best: Option<u64> },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn refusal(msg: impl Into<String>) -> Self {
        Error::Refusal(msg.into())
    }
}
