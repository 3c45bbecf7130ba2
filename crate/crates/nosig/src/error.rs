//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by construction, evolution and audit operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |h - h†| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("columns are not orthonormal: max deviation {deviation:.3e}")]
    NotOrthonormal { deviation: f64 },

    #[error("{given} columns cannot fit in a {target}-dimensional unitary")]
    TooManyColumns { given: usize, target: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("ensemble does not reproduce the spectral density matrix: max deviation {deviation:.3e}")]
    NotSameDensity { deviation: f64 },

    #[error("matrix is not unitary: max |u†u - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("requested size {size} is below the density-matrix rank {rank}")]
    SizeTooSmall { size: usize, rank: usize },

    #[error("ensembles are not equivalent: density matrices differ by {distance:.6e} in trace distance")]
    NotEquivalent { distance: f64 },

    #[error("measurement basis is invalid: {reason}")]
    BadBasis { reason: String },

    #[error("outcome labels must be distinct")]
    DuplicateLabels,

    #[error("state is not one of the four states the table map is defined on")]
    NotInTable,

    #[error("evolution time must be positive, got {t}")]
    NonPositiveTime { t: f64 },

    #[error("density matrix is not pure: second eigenvalue {residual:.3e}")]
    NotPure { residual: f64 },

    #[error("bad integration step: t = {t}, dt = {dt}")]
    BadStep { t: f64, dt: f64 },

    #[error("jump probability {p:.3e} exceeds 0.1; decrease dt")]
    StepTooLarge { p: f64 },

    #[error("trajectory count must be at least 1")]
    ZeroTrajectories,

    #[error("this evolution acts on density matrices only; state vectors need the jump unraveling")]
    NotVectorEvolution,

    #[error("state vector must be normalized, got norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("state vector is (numerically) zero")]
    ZeroState,

    #[error("mixing parameter must lie strictly between 0 and 1, got {lambda}")]
    LambdaOutOfRange { lambda: f64 },

    #[error("an audit needs at least 2 decompositions, got {total}")]
    NotEnoughDecompositions { total: usize },

    #[error("audit threshold must be positive, got {threshold}")]
    BadThreshold { threshold: f64 },

    #[error("ensemble is empty or carries no probability")]
    EmptyEnsemble,

    #[error("total ensemble probability is {total:.12} instead of 1")]
    BadTotalWeight { total: f64 },

    #[error("invalid density matrix: {reason}")]
    BadDensity { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
