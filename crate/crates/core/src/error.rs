use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("eigendecomposition unreliable: min |xᵀx| = {metric:.3e}")]
    DecompositionUnreliable { metric: f64 },

    #[error("singular ensemble matrix, elimination is invalid (relative residual {residual:.3e})")]
    EliminationSingular { residual: f64 },

    #[error("ensemble frequency and linewidth both vanish")]
    DegenerateEnsemble,

    #[error("unphysical parameters: {0}")]
    Unphysical(String),

    #[error("drive matrix is singular at this laser frequency")]
    ResonanceSingular,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rate matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("integration failed: {0}")]
    Integration(String),
}
