use sffm_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("model file: {0}")]
    File(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 validation, 2 numerical, 3 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                Error::InvalidModel(_)
                | Error::InvalidInitial(_)
                | Error::InvalidTandem(_)
                | Error::AtomTooLarge { .. }
                | Error::Dimension { .. }
                | Error::Boundary { .. } => 1,
                Error::BadArgument { .. } | Error::UnknownExample(_) => 3,
                _ => 2,
            },
            CliError::File(_) => 1,
            CliError::Io { .. } | CliError::Write { .. } | CliError::Usage(_) => 3,
        }
    }
}
