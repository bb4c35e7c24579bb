use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report. The CLI maps variants onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("parameter regime error: {0}")]
    ParameterRegime(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("positivity lost at t = {t} after {retries} step retries")]
    PositivityLoss { t: f64, retries: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("config error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config error for `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Range(_) => "range",
            Error::Precondition(_) => "precondition",
            Error::NonConvergence { .. } => "non_convergence",
            Error::ParameterRegime(_) => "parameter_regime",
            Error::InsufficientData(_) => "insufficient_data",
            Error::PositivityLoss { .. } => "positivity_loss",
            Error::Numerical(_) => "numerical",
            Error::Input(_) => "input",
            Error::ConfigSyntax { .. } => "config_syntax",
            Error::ConfigValue { .. } => "config_value",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
