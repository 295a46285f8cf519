use alloc::string::String;
use alloc::vec::Vec;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operands belong to different graded algebras")]
    AlgebraMismatch,

    #[error("invalid graded algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polynomial parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("gauge calibration failed: no feasible layer weight in (0, 1], worst slack {worst_slack}")]
    CalibrationFailed { worst_slack: f64 },

    #[error("ball sampling failed: accepted {accepted} of {attempted} proposals (efficiency below 1e-4)")]
    SamplingFailed { accepted: usize, attempted: usize },

    #[error("degree of the zero p-vector is undefined")]
    ZeroPVector,

    #[error("point is off the level set: |f| = {residual}")]
    OffManifold { residual: f64 },

    #[error("Jacobian is rank deficient: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("Newton iteration failed to converge after {attempts} domain shrinks")]
    NewtonFailed { attempts: usize },

    #[error("degree routes disagree at {point:?}: 2p-h = {from_codim}, Gromov = {gromov}, p-vector = {pvector} (h = {h})")]
    DegreeRouteMismatch {
        point: Vec<f64>,
        from_codim: u32,
        gromov: u32,
        pvector: u32,
        h: usize,
    },

    #[error("tensor-grid quadrature supports manifold dimension <= 3, got {dim}")]
    QuadratureUnsupported { dim: usize },

    #[error("no sample hit the integration region; enlarge the sample count")]
    ZeroCoverage,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
