use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("scene contains no triangles")]
    EmptyScene,

    #[error("unknown preset `{name}`; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("{path}:{line}: {detail}")]
    Parse { path: PathBuf, line: usize, detail: String },

    #[error("{path}: incompatible dense frame ({detail})")]
    Incompatible { path: PathBuf, detail: String },

    #[error("frame sets differ; missing ids: {}", missing.join(", "))]
    MissingFrames { missing: Vec<String> },

    #[error("frame {frame_id}: {source}")]
    Frame {
        frame_id: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn in_frame(self, frame_id: u64) -> Self {
        match self {
            e @ Error::Frame { .. } => e,
            e => Error::Frame {
                frame_id,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code for the error's category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Range { .. } | Error::Config(_) | Error::UnknownPreset { .. } => 2,
            Error::Io { .. } => 3,
            Error::Format { .. } | Error::Parse { .. } | Error::Incompatible { .. } => 4,
            Error::MissingFrames { .. } => 5,
            Error::EmptyScene => 6,
            Error::Frame { source, .. } => source.exit_code(),
        }
    }
}
