use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("non-finite loss in epoch {epoch}, batch {batch}; last good epoch: {}", last_good_epoch.map_or("none".to_string(), |e| e.to_string()))]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        last_good_epoch: Option<usize>,
    },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("incompatible input: {0}")]
    Incompatible(String),

    #[error("missing input: {}", .0.display())]
    Missing(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{cell}: {source}")]
    InCell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_cell(self, cell: impl Into<String>) -> Self {
        Error::InCell {
            cell: cell.into(),
            source: Box::new(self),
        }
    }

    /// Process exit status: 2 for I/O, 3 for missing or unusable input
    /// (including bad configuration), 4 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => 2,
            Error::Config(_) | Error::Structural(_) | Error::Incompatible(_) | Error::Missing(_) | Error::Json(_) => 3,
            Error::Numerical(_) | Error::NonFiniteLoss { .. } | Error::UndefinedCorrelation(_) => 4,
            Error::InCell { source, .. } => source.exit_code(),
        }
    }
}
