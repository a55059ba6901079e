use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] correg::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration and input problems, 3 for numerical failures,
    /// 4 for inputs the methods are not defined for.
    pub fn exit_code(&self) -> i32 {
        use correg::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::InvalidParameter { .. } | E::InvalidDensity(_) | E::Parse(_) | E::Io(_) => 2,
                E::Numerical(_) | E::EmptyWindow { .. } | E::ZeroMass { .. } | E::TooManySkipped { .. } => 3,
                E::Domain(_) | E::DegenerateCurvature(_) | E::InsufficientReplicates(_) => 4,
            },
        }
    }
}
