use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unphysical state (density {density:e}, pressure {pressure:e})")]
    UnphysicalState { density: f64, pressure: f64 },

    #[error("Galerkin system matrix is singular")]
    SingularSystem,

    #[error("index {index} out of range for {len} cells")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("step {step} failed{}: {reason}", .cell.map(|c| format!(" at cell {c}")).unwrap_or_default())]
    StepFailed {
        step: usize,
        cell: Option<usize>,
        reason: String,
    },

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("no exact solution available for '{0}'")]
    NoExactSolution(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
