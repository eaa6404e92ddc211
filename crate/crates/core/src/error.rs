use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no records")]
    NoRecords { path: PathBuf },

    #[error("{path}:{line}: field `{field}`: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate article id `{0}`")]
    DuplicateId(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corpus contains unlabeled article `{0}`")]
    Unlabeled(String),

    #[error("lexicon {file}:{line}: {message}")]
    Lexicon {
        file: String,
        line: usize,
        message: String,
    },

    #[error("lexicon pack is missing categories: {}", .0.join(", "))]
    MissingCategories(Vec<String>),

    #[error("tree parse error at byte {offset}: {message}")]
    TreeParse { offset: usize, message: String },

    #[error("{file}:{line}: {message}")]
    Sidecar {
        file: String,
        line: usize,
        message: String,
    },

    #[error("vectors {file}:{line}: {message}")]
    Vectors {
        file: String,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("unknown feature group `{0}`")]
    UnknownGroup(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
