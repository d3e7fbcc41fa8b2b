use thiserror::Error;

/// Errors produced by curve geometry, invariants, the network and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("curve has zero variance and cannot be normalized")]
    ZeroVariance,

    #[error("degenerate parameterization: |C_p| vanishes near index {index}")]
    DegenerateParameterization { index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("malformed file {path}: {msg}")]
    MalformedFile { path: String, msg: String },

    #[error("unsupported format version {found}, expected {expected}")]
    FormatVersion { found: u32, expected: u32 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable tag for each variant, used in CLI error
    /// lines of the form `error: <kind>: <detail>`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCurve(_) => "invalid_curve",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ZeroVariance => "zero_variance",
            Error::DegenerateParameterization { .. } => "degenerate_parameterization",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::Parse { .. } => "parse",
            Error::MalformedFile { .. } => "malformed_file",
            Error::FormatVersion { .. } => "format_version",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
