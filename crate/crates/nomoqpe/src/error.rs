use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid particle class `{label}`: {reason}")]
    InvalidClass { label: String, reason: String },

    #[error("spin-orbital index {index} out of range 1..={total}")]
    IndexOutOfRange { index: usize, total: usize },

    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("integral table is not Hermitian: {0}")]
    NonHermitianIntegrals(String),

    #[error("infeasible basis constraint: {0}")]
    InfeasibleConstraint(String),

    #[error("encoding {encoding} is not valid for {kind} class `{label}`")]
    EncodingMismatch {
        encoding: String,
        kind: String,
        label: String,
    },

    #[error("{0} is not implemented")]
    NotImplemented(&'static str),

    #[error("materialization refused: {qubits} qubits exceeds cap of {cap}")]
    QubitCapExceeded { qubits: usize, cap: usize },

    #[error("size guard exceeded: {size} > {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("energy {energy} outside phase window [{e_min}, {e_max})")]
    EnergyOutsideWindow { energy: f64, e_min: f64, e_max: f64 },

    #[error("eigenphase of state {index} within 2^-{bits} of another eigenphase; voting would silently merge them")]
    DegeneratePhase { index: usize, bits: u32 },

    #[error("success probability {p} <= 0.5 cannot be amplified by majority voting")]
    NotAmplifiable { p: f64 },

    #[error("invalid configuration: {0}")]
    InvalidArgument(String),

    #[error("gate-count formula returned a non-integer value for n={n}, m={m}")]
    NonIntegerGateCount { n: u64, m: u64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("conflicting integral values: {0}")]
    IntegralConflict(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
