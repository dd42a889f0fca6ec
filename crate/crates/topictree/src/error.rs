use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },

    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("embedding coverage below {floor}: {worst}")]
    Coverage { floor: f64, worst: String },

    #[error("cannot serve on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] topictree_core::Error),
}

/// Process exit status for each class of failure.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 2;
    pub const SCHEMA: u8 = 3;
    pub const NUMERIC: u8 = 4;
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use topictree_core::Error as C;
        match self {
            Error::Schema(_) => exit::SCHEMA,
            Error::Core(C::Numeric(_) | C::ZeroColumn(_) | C::ShapeMismatch { .. } | C::EmptyMatrix) => exit::NUMERIC,
            _ => exit::INPUT,
        }
    }
}
