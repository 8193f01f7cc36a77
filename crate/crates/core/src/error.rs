use thiserror::Error;

/// Errors raised by the simulator, circuit and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis index {index} out of range for {num_qubits} qubits")]
    BasisIndexOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit count {0} outside supported range 1..=12")]
    UnsupportedQubitCount(usize),

    #[error("qubit {qubit} out of range for {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("gate is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("qubits {0} and {1} are not nearest neighbours")]
    NotAdjacent(usize, usize),

    #[error("qubit {0} used twice within one moment")]
    QubitReused(usize),

    #[error("state dimensions differ ({0} vs {1} qubits)")]
    DimensionMismatch(usize, usize),

    #[error("amplitudes are not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),

    #[error("qubit {qubit} is entangled with the register (reduced purity {purity:.12})")]
    Entangled { qubit: usize, purity: f64 },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate `{0}` is not a Clifford gate")]
    NonClifford(String),

    #[error("interaction is not entangling")]
    NonEntangling,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("encoder is not a valid single-error-correcting code: {0}")]
    InvalidEncoder(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
