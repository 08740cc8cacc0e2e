use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for width {width}")]
    QubitOutOfRange { index: usize, width: usize },

    #[error("control and target coincide at qubit {0}")]
    IndexCollision(usize),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("invalid Pauli literal `{0}`")]
    InvalidPauli(String),

    #[error("unphysical Bloch vector with norm {0}")]
    Unphysical(f64),

    #[error(
        "outcome {bit} on qubit {qubit} has probability {probability:e}, cannot condition on it"
    )]
    ImpossibleOutcome {
        qubit: usize,
        bit: u8,
        probability: f64,
    },

    #[error("width {width} exceeds the dense cap of {cap} qubits")]
    WidthCap { width: usize, cap: usize },

    #[error("invalid dealer configuration: {0}")]
    InvalidConfig(String),

    #[error("T-count exceeds magic budget ({t_count} > {budget})")]
    MagicBudget { t_count: usize, budget: usize },

    #[error("integrity failure while decoding: {0}")]
    Integrity(String),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid adversary model: {0}")]
    Adversary(String),

    #[error("unsupported on this backend: {0}")]
    Unsupported(String),

    #[error("branch mismatch after correction: deviation {0:e}")]
    BranchMismatch(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
