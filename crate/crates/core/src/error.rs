use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A size limit was hit. `reached` is how far the computation got.
    #[error("{what} budget exceeded: limit {limit}, reached {reached}")]
    Budget {
        what: &'static str,
        limit: u64,
        reached: u64,
    },

    #[error("malformed ring spec: {0}")]
    Spec(String),

    #[error("cannot parse element `{input}`: {reason}")]
    ElementSyntax { input: String, reason: String },

    #[error("element index {index} out of range for ring of size {size}")]
    ElementRange { index: usize, size: usize },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("matrix is not a member of the group")]
    NotInGroup,

    #[error("group was built without word records")]
    NoWords,

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("row {0} is not in the enumerated row set")]
    RowNotFound(String),

    /// An internal consistency check failed. Signals a bug, not a user error.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}
