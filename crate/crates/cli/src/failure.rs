use thiserror::Error;

/// Command failures, split by exit code.
#[derive(Debug, Error)]
pub enum Failure {
    /// Malformed configuration, arguments or input files.
    #[error("{0}")]
    Validation(String),
    /// A pipeline stage rejected the data.
    #[error("{name}: {message}")]
    Pipeline { name: &'static str, message: String },
    #[error("{0}")]
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Pipeline { .. } | Failure::Io(_) => 3,
        }
    }
}

impl From<pointscat::Error> for Failure {
    fn from(e: pointscat::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(format!("{}: {e}", e.name()))
        } else {
            Failure::Pipeline {
                name: e.name(),
                message: e.to_string(),
            }
        }
    }
}
