use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("elements belong to different ambient groups")]
    AmbientMismatch,
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("cap exceeded while computing {what} (cap {cap}); raise the cap or lower the truncation")]
    Cap { what: String, cap: usize },
    #[error("truncation too coarse: {0}")]
    Truncation(String),
    #[error("degree-1 operation is the identity")]
    DegreeOne,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    pub fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn cap(what: impl Into<String>, cap: usize) -> Self {
        Error::Cap { what: what.into(), cap }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Cap { .. } => 3,
            Error::Failed(_) => 1,
            _ => 2,
        }
    }
}
