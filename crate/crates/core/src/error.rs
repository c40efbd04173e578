use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("ground sizes differ: {0} vs {1}")]
    GroundMismatch(usize, usize),

    #[error("not a partial permutation: {0}")]
    NotPartialPermutation(String),

    #[error("family is not {t}-intersecting")]
    NotIntersecting { t: usize },

    #[error("operation requires a family of full permutations")]
    NotFull,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("instance too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}
