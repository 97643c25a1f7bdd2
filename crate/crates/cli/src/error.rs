use thiserror::Error;

/// Failure of a run, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{op} failed: {source}")]
    Numerical {
        op: String,
        #[source]
        source: gaussbv_core::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } | CliError::Output { .. } => 1,
        }
    }
}

/// Tags a core result with the operation that produced it. Schedule and grid
/// resolution errors come from the configured times and levels, so they are
/// reported as configuration errors.
pub fn op<T>(name: impl Into<String>, r: gaussbv_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| match source {
        gaussbv_core::Error::Schedule(_) | gaussbv_core::Error::GridTooCoarse(_) => {
            CliError::Config(format!("{}: {source}", name.into()))
        }
        source => CliError::Numerical { op: name.into(), source },
    })
}
