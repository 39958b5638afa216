//! Command-line front end for the `qsw` simulator: configuration loading,
//! CSV/JSON/SVG writers and the `bounds`, `sweep` and `simulate` commands.

pub mod commands;
pub mod config;
pub mod plot;
pub mod report;

pub use config::{ResolvedRun, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("every grid point failed; first error: {0}")]
    SweepFailed(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] qsw_core::Error),
}

impl CliError {
    /// 0 is success; 2 flags bad input, 3 a sweep with no successful point.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::SweepFailed(_) => 3,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                qsw_core::Error::UnsupportedEnsemble(_)
                | qsw_core::Error::InvalidArgument(_)
                | qsw_core::Error::ParamLength { .. }
                | qsw_core::Error::NonBinary { .. }
                | qsw_core::Error::Topology(_)
                | qsw_core::Error::Json(_) => 2,
                _ => 1,
            },
        }
    }
}
