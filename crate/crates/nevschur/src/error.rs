use thiserror::Error;

/// Errors surfaced by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("not positive semidefinite: eigenvalue {eigenvalue:.3e} below tolerance {tolerance:.3e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("not a contraction: operator norm {norm}")]
    NotContraction { norm: f64 },

    #[error("not selfadjoint: asymmetry {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSelfadjoint { defect: f64, tolerance: f64 },

    #[error("singular matrix encountered in {context}")]
    Singular { context: String },

    #[error("near-singular resolvent: condition number {cond:.3e} exceeds 1e12")]
    NearSingularResolvent { cond: f64 },

    #[error("point {point} is outside the admissible domain: {domain}")]
    OutsideDomain { point: String, domain: String },

    #[error("minimality required: {context}")]
    MinimalityRequired { context: String },

    #[error("ill-conditioned defect ranges: reassembly residual {residual:.3e}")]
    IllConditionedExtraction { residual: f64 },

    #[error("reconstruction residual {residual:.3e} exceeds {limit:.3e}")]
    ReconstructionFailed { residual: f64, limit: f64 },

    #[error("infeasible coupler: ||K22|| = {k22_norm} and transfer(0) is nonzero")]
    InfeasibleCoupler { k22_norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
