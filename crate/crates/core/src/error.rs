use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("topic count {k} exceeds min(d, n) = {max}")]
    RankTooLarge { k: usize, max: usize },

    #[error("vocabulary is empty after document-frequency filtering")]
    EmptyVocabulary,

    #[error("every document has an empty TF-IDF vector")]
    AllDocumentsExcluded,

    #[error("column {0} of the dictionary matrix is zero")]
    ZeroColumn(usize),

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("only {0} scoreable words; coherence needs at least 2")]
    TooFewWords(usize),

    #[error("no token of topic {0} has an embedding")]
    NoEmbeddedTokens(String),

    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate token {0:?}")]
    DuplicateToken(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}
