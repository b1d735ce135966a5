use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedRecord {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: duplicate document id {id:?}")]
    DuplicateDocument {
        path: String,
        line: usize,
        id: String,
    },

    #[error("{path}:{line}: edge endpoint not among documents: {id:?}")]
    UnknownEndpoint {
        path: String,
        line: usize,
        id: String,
    },

    #[error("unknown document id {0:?}")]
    UnknownDocument(String),

    #[error("partition references document index {0} not present in the graph")]
    DocumentOutOfRange(u32),

    #[error("unknown cluster id {0}")]
    UnknownCluster(usize),

    #[error("unknown tree node id {0:?}")]
    UnknownNode(String),

    #[error("member set is empty")]
    EmptyMembers,

    #[error("empty {0} set")]
    EmptySet(&'static str),

    #[error("case {case_id:?}: relevant documents missing from the graph: {missing:?}")]
    MissingRelevant {
        case_id: String,
        missing: Vec<String>,
    },

    #[error("case {case_id:?}: relevant set is not a subset of the baseline set ({outside} ids outside)")]
    RelevantNotSubset { case_id: String, outside: usize },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("input path does not exist: {0}")]
    MissingInput(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad or missing inputs rather than internal
    /// failures; the CLI maps these to exit status 2.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
