use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 1.
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// Failure while running or writing results; exit code 2.
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<spinbath_core::Error> for CliError {
    fn from(e: spinbath_core::Error) -> Self {
        use spinbath_core::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::TooManySpins { .. }
            | E::SpinIndexOutOfRange { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidState(_) => CliError::Validation(e.to_string()),
            E::Eigensolver { .. }
            | E::NonFiniteTrajectory { .. }
            | E::TooManyExclusions { .. }
            | E::FitFailed { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
