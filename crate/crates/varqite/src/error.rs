use thiserror::Error;

/// Errors shared across the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate acts twice on qubit {0}")]
    DuplicateQubit(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid Pauli character {0:?}; expected one of I, X, Y, Z")]
    InvalidPauliChar(char),

    #[error("empty Pauli word")]
    EmptyPauliWord,

    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParamLength { got: usize, expected: usize },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("cannot normalize a zero-norm vector")]
    ZeroNorm,

    #[error("trajectories are misaligned: {0}")]
    MisalignedTrajectories(String),

    #[error("mesh refinement exceeded the n_grid cap of {0}")]
    RefinementCapExceeded(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
