use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::DocId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("duplicate document name `{0}`")]
    DuplicateDocument(String),

    #[error("duplicate judgment for query `{qid}` and document `{doc}`")]
    DuplicateJudgment { qid: String, doc: String },

    #[error("text has no tokens")]
    EmptyText,

    #[error("term `{term}` has zero probability under the reference model")]
    ZeroProbability { term: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alpha = {alpha} must be smaller than the number of nodes ({nodes})")]
    AlphaTooLarge { alpha: usize, nodes: usize },

    #[error("out-edges of node {row} have zero total weight")]
    ZeroRow { row: usize },

    #[error("graph is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("graph has no positive edge weight")]
    EmptyGraph,

    #[error("no score for document {0}")]
    MissingScore(DocId),

    #[error("no query has relevance judgments")]
    NoJudgments,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Runtime,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Config,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::DuplicateDocument(_)
            | Error::DuplicateJudgment { .. }
            | Error::NoJudgments => ErrorClass::Data,
            Error::Context { source, .. } => source.class(),
            _ => ErrorClass::Runtime,
        }
    }

    /// Process exit code: 1 for configuration, 2 for data and 3 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => 1,
            ErrorClass::Data => 2,
            ErrorClass::Runtime => 3,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn with_context<F, S>(self, f: F) -> Result<T>
    where
        F: FnOnce() -> S,
        S: Into<String>;
}

impl<T> ResultExt<T> for Result<T> {
    fn with_context<F, S>(self, f: F) -> Result<T>
    where
        F: FnOnce() -> S,
        S: Into<String>,
    {
        self.map_err(|e| e.context(f()))
    }
}
