use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("{n} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { n: usize, limit: usize },

    #[error("index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("coincident centers: separation {distance} Å is below 0.1 Å")]
    CoincidentCenters { distance: f64 },

    #[error("operator is not Hermitian (max imaginary coefficient {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("operator is not unitary: {0}")]
    NonUnitary(String),

    #[error("convergence gate failed: halving the substep moved the state by {deviation:e}")]
    ConvergenceGate { deviation: f64 },

    #[error("variational evolution diverged at t = {t} fs (residual {residual:e})")]
    Divergence { t: f64, residual: f64 },

    #[error("time {t} fs is not on the recorded grid")]
    OffGrid { t: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Wraps an I/O failure with the offending path.
    pub(crate) fn io_at(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Self + '_ {
        move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }

    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            Error::Io(_) | Error::Parse { .. } | Error::Trajectory(_) => 3,
            _ => 2,
        }
    }
}
