use std::path::PathBuf;

use thiserror::Error;

/// Failures mapped onto the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(cdadt::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Report(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Engine(e) => engine_exit_code(e),
            CliError::Io { .. } | CliError::Input { .. } | CliError::Report(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn input(path: impl Into<PathBuf>) -> impl FnOnce(String) -> CliError {
        let path = path.into();
        move |message| CliError::Input { path, message }
    }
}

fn engine_exit_code(e: &cdadt::Error) -> i32 {
    use cdadt::Error as E;
    match e {
        E::InvalidParameter(_) | E::Topology(_) | E::Dimension { .. } => 1,
        E::Io(_)
        | E::Csv(_)
        | E::EmptyCsv
        | E::RaggedRow { .. }
        | E::UnparseableCell { .. }
        | E::NonFiniteCell { .. } => 3,
        _ => 2,
    }
}

impl From<cdadt::Error> for CliError {
    fn from(e: cdadt::Error) -> Self {
        CliError::Engine(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
