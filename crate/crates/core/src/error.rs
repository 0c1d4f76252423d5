use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("device: {0}")]
    Device(String),

    #[error("value {value} outside calibrated nonlinearity range (0, {max}]")]
    NonlinearityRange { value: f64, max: f64 },

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("topology: {0}")]
    Topology(String),

    #[error("state: {0}")]
    State(String),

    #[error("mapping: {0}")]
    Mapping(String),

    #[error("capability: {0}")]
    Capability(String),

    #[error("capacity: {0}")]
    Capacity(String),

    #[error("trace: {0}")]
    Trace(String),

    #[error("config: {0}")]
    Config(String),

    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Name of the subsystem the error originated in, used by the CLI.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Device(_) | Error::NonlinearityRange { .. } | Error::Domain { .. } => {
                "device_model"
            }
            Error::Topology(_) | Error::State(_) | Error::Dataset(_) => "quant_net",
            Error::Mapping(_) | Error::Capability(_) | Error::Capacity(_) => "mapping",
            Error::Trace(_) => "archsim",
            Error::Config(_) | Error::Validation { .. } => "config",
            Error::Io { .. } => "io",
        }
    }

    /// True for errors caused by the user's configuration rather than the run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Validation { .. })
    }
}
