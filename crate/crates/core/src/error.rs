use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: malformed record: {reason}", path.display())]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{}:{line}: duplicate article_id `{id}`", path.display())]
    DuplicateArticle { path: PathBuf, line: usize, id: String },

    #[error("no tag sidecar for article `{article_id}` (expected {})", path.display())]
    MissingSidecar { article_id: String, path: PathBuf },

    #[error("{}:{line}: malformed line: {reason}", path.display())]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("name is empty after normalization: {0:?}")]
    EmptyName(String),

    #[error("a statement needs at least two distinct entities, got {0}")]
    TooFewEntities(usize),

    #[error("duplicate entity `{0}` in statement")]
    DuplicateEntity(String),

    #[error("empty network has no top core")]
    EmptyNetwork,

    #[error("snapshot series is empty")]
    EmptySeries,

    #[error("{0}")]
    Unsupported(String),

    #[error("overlap needs ≥ 2 periods, got {0}")]
    TooFewBuckets(usize),

    #[error("unknown source `{0}`")]
    UnknownSource(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing intermediate {}; run `statement-net {stage}` first", path.display())]
    MissingIntermediate { path: PathBuf, stage: &'static str },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 1 validation, 2 data, 3 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::MissingIntermediate { .. } | Error::Unsupported(_) => 1,
            Error::Invariant(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
