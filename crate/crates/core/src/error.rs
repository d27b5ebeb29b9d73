use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exhaustive search needs {required} assignments, cap is {cap}")]
    SearchCapExceeded { required: f64, cap: u64 },

    #[error("degenerate beamformer: {0}")]
    DegenerateBeam(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("invalid config field `{field}`: {reason}")]
    ConfigField { field: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "E_DOMAIN",
            Error::IndexOutOfRange { .. } => "E_INDEX",
            Error::DimensionMismatch(_) => "E_DIMENSION",
            Error::InvalidInput(_) => "E_INPUT",
            Error::SearchCapExceeded { .. } => "E_SEARCH_CAP",
            Error::DegenerateBeam(_) => "E_DEGENERATE",
            Error::ConfigParse(_) => "E_CONFIG_PARSE",
            Error::ConfigField { .. } => "E_CONFIG_FIELD",
            Error::Io { .. } => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn field(field: &str, reason: impl Into<String>) -> Self {
        Error::ConfigField {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
