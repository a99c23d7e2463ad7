use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid Hilbert-space dimension {0}")]
    InvalidDimension(usize),

    #[error("generator index {index} out of range (basis has {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("density matrix trace is {0}, expected 1")]
    NonUnitTrace(f64),

    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("unphysical Bloch vector: reconstruction has eigenvalue {0:e}")]
    Unphysical(f64),

    #[error("Bloch vector has length {got}, expected {expected}")]
    BlochLength { expected: usize, got: usize },

    #[error("cosine {0} lies outside [-1, 1] beyond round-off")]
    CosineOutOfRange(f64),

    #[error("{0} has zero Bloch norm")]
    ZeroNorm(&'static str),

    #[error("angles to the state vector are undefined for the completely mixed state")]
    UndefinedAngle,

    #[error("{quantity}: vector and trace computations differ by {residual:e}")]
    GeometryMismatch { quantity: &'static str, residual: f64 },

    #[error("relation requires a qubit (N = 2), got N = {0}")]
    RequiresQubit(usize),

    #[error("relation requires a pure state (purity {purity}, expected {expected})")]
    NotPure { purity: f64, expected: f64 },

    #[error("state-dependent bound is not applicable to mixed states")]
    NotApplicable,

    #[error("relation requires <A> = <B> = 0 (got {mean_a:e}, {mean_b:e})")]
    NonzeroMean { mean_a: f64, mean_b: f64 },

    #[error("square-root argument {0:e} is negative beyond tolerance")]
    NegativeRadicand(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("grid cell {0} outside [1e-3, 0.1]")]
    InvalidGrid(f64),

    #[error("invalid sampling configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
