use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(ht_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.as_ref().display().to_string();
        move |source| CliError::Io { path, source }
    }
}

impl From<ht_core::Error> for CliError {
    fn from(e: ht_core::Error) -> Self {
        use ht_core::Error as E;
        match e {
            E::InvalidGeometry(_)
            | E::InvalidRoi { .. }
            | E::InvalidArgument(_)
            | E::GridCollision { .. }
            | E::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
