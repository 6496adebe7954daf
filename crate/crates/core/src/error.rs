use std::path::PathBuf;

/// Errors reported by the estimation pipeline and its file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameters or a dataset too small for the requested family.
    #[error("configuration error: {0}")]
    Config(String),

    /// The sampler could not find a non-degenerate minimal sample.
    #[error("degenerate data: {attempts} consecutive degenerate minimal samples")]
    DegenerateData { attempts: usize },

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
