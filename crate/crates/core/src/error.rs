use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("field does not match mesh: {0}")]
    FieldShape(String),

    #[error("invalid exponent configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation that needs a nonzero field received the zero field.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("moments are outside the three-root region")]
    OutsideThreeRootRegion,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("singular linear system at pivot {0}")]
    Singular(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
