use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid cylinder: {0}")]
    InvalidCylinder(String),

    #[error("non-finite value {value} at t={t}, x={x:?}")]
    NonFinite { t: f64, x: Vec<f64>, value: f64 },

    #[error("cylinder does not intersect the grid")]
    EmptyIntersection,

    #[error("field values do not match grid: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("non-finite hamiltonian value at t={t}, x={x:?}, P={p:?}")]
    HamiltonianNonFinite { t: f64, x: Vec<f64>, p: Vec<f64> },

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("solver aborted at step {step} (t={t}): {reason}")]
    SolverAbort { step: usize, t: f64, reason: String },

    #[error("p = {p} is outside the theorem range (1, N) with N = {n}")]
    OutOfTheoremScope { p: f64, n: usize },

    #[error("root finding did not converge: {0}")]
    RootFinding(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("envelope violated at t={t}, x={x:?}: |u|={value} > bound {bound}")]
    EnvelopeViolated { t: f64, x: Vec<f64>, value: f64, bound: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
