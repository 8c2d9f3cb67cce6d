use std::path::PathBuf;

use thiserror::Error;

use crate::graph::LightconeClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge ({0}, {1}) is not in the graph")]
    MissingEdge(usize, usize),

    #[error("infeasible graph constraints: {0}")]
    Infeasible(String),

    #[error("graph has {nodes} nodes but the limit is {cap}")]
    CapExceeded { nodes: usize, cap: usize },

    #[error("lightcone class {0} is not present in the transfer map")]
    UnknownClass(LightconeClass),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// Process exit status: 2 for configuration and input errors, 3 for
    /// infeasible or degenerate inputs, 4 for verification failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Io { .. } | Error::Json(_) | Error::UnknownClass(_) => 2,
            Error::InvalidGraph(_)
            | Error::MissingEdge(..)
            | Error::Infeasible(_)
            | Error::CapExceeded { .. }
            | Error::Degenerate(_) => 3,
            Error::Verification(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
