use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {lambda_min:.3e})")]
    NotPositive { lambda_min: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),

    #[error("controller {which} is not invertible (sigma_min / sigma_max = {ratio:.3e})")]
    NotInvertible { which: &'static str, ratio: f64 },

    #[error("block {index} operator C*L*LC' is not self-adjoint (asymmetry {asymmetry:.3e})")]
    BlockNotSelfAdjoint { index: usize, asymmetry: f64 },

    #[error(
        "block {index} operator C*L*LC' is not positive (smallest eigenvalue {lambda_min:.3e})"
    )]
    BlockNotPositive { index: usize, lambda_min: f64 },

    #[error("family is not a frame (lower bound {lower:.3e})")]
    NotAFrame { lower: f64 },

    #[error("S^(-1/2) does not commute with the controllers (|[S^-1/2, C]| = {c_commutator:.3e}, |[S^-1/2, C']| = {cp_commutator:.3e})")]
    CommutationFailure {
        c_commutator: f64,
        cp_commutator: f64,
    },

    #[error("systems are not a dual pair (identity residual {residual:.3e})")]
    NotADualPair { residual: f64 },

    #[error("canonical dual requires C = C'")]
    ControllersDiffer,

    #[error("coefficients do not represent f (residual {residual:.3e})")]
    NotARepresentation { residual: f64 },

    #[error("invalid index split: {0}")]
    BadSplit(String),

    #[error("system is not Parseval (bounds {lower:.12}, {upper:.12})")]
    NotParseval { lower: f64, upper: f64 },

    #[error("leading coefficient must be non-zero")]
    ZeroLeadingCoefficient,

    #[error("u + v differs from the identity by {residual:.3e}")]
    NotAPartition { residual: f64 },

    #[error("iteration diverged at step {iteration} (residual {residual:.3e})")]
    Diverged { iteration: usize, residual: f64 },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("instance file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
