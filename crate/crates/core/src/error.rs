use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library. Variants carry enough context to tell
/// which precondition failed and where in the Brillouin zone it happened.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("eigensolver failed at grid node {node}: {reason}")]
    Eigensolver { node: usize, reason: String },

    #[error("matrix has an eigenvalue within {tol:e} of zero ({value:e})")]
    NearZeroEigenvalue { value: f64, tol: f64 },

    #[error("matrix is singular (smallest singular value {sigma_min:e})")]
    SingularMatrix { sigma_min: f64 },

    #[error("resolvent is singular at k = {k:?} (smallest singular value {sigma_min:e})")]
    ResolventSingular { k: Vec<f64>, sigma_min: f64 },

    #[error("unsupported emitter layout: {0}")]
    UnsupportedLayout(String),

    #[error("emitter layout does not fit the system: {0}")]
    LayoutMismatch(String),

    #[error(
        "deformation certificate failed at k = {k:?}, lambda = {lambda}: relative error {rel_err:e}"
    )]
    CertificateFailed { k: Vec<f64>, lambda: f64, rel_err: f64 },

    #[error("model is not chiral with respect to the given operator (residual {residual:e})")]
    NotChiral { residual: f64 },

    #[error("gap closes at k = {k:?} (distance {distance:e})")]
    GapClosed { k: Vec<f64>, distance: f64 },

    #[error("point gap closes at k = {k:?} (distance {distance:e})")]
    PointGapClosed { k: Vec<f64>, distance: f64 },

    #[error("unitarization failed: {0}")]
    UnitarizationFailed(String),

    #[error("input is not Hermitian (residual {residual:e})")]
    NonHermitianInput { residual: f64 },

    #[error("invariant is not quantized: raw value {raw}")]
    NonQuantized { raw: f64 },

    #[error("Fourier coefficients do not truncate within range {range}")]
    InfiniteRange { range: usize },

    #[error("no eigenstates in the requested sector")]
    EmptySector,

    #[error("matrix is not unitary (residual {residual:e})")]
    NonUnitary { residual: f64 },

    #[error("symmetry candidates give contradictory classes: {0}")]
    AmbiguousClass(String),

    #[error("symmetry content lies outside the supported classes: {0}")]
    UnsupportedClass(String),
}

impl Error {
    /// Stable identifier of the failed precondition.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Linalg(_) => "linalg",
            Error::Eigensolver { .. } => "eigensolver",
            Error::NearZeroEigenvalue { .. } => "near_zero_eigenvalue",
            Error::SingularMatrix { .. } => "singular_matrix",
            Error::ResolventSingular { .. } => "resolvent_singular",
            Error::UnsupportedLayout(_) => "unsupported_layout",
            Error::LayoutMismatch(_) => "layout_mismatch",
            Error::CertificateFailed { .. } => "certificate_failed",
            Error::NotChiral { .. } => "not_chiral",
            Error::GapClosed { .. } => "gap_closed",
            Error::PointGapClosed { .. } => "point_gap_closed",
            Error::UnitarizationFailed(_) => "unitarization_failed",
            Error::NonHermitianInput { .. } => "non_hermitian_input",
            Error::NonQuantized { .. } => "non_quantized",
            Error::InfiniteRange { .. } => "infinite_range",
            Error::EmptySector => "empty_sector",
            Error::NonUnitary { .. } => "non_unitary",
            Error::AmbiguousClass(_) => "ambiguous_class",
            Error::UnsupportedClass(_) => "unsupported_class",
        }
    }

    /// The module whose precondition failed.
    pub fn module(&self) -> &'static str {
        match self {
            Error::ResolventSingular { .. } | Error::UnsupportedLayout(_) | Error::CertificateFailed { .. } => {
                "mediator"
            }
            Error::LayoutMismatch(_) | Error::EmptySector => "realspace",
            Error::NotChiral { .. }
            | Error::GapClosed { .. }
            | Error::PointGapClosed { .. }
            | Error::NonHermitianInput { .. }
            | Error::NonQuantized { .. } => "invariants",
            Error::NonUnitary { .. } | Error::AmbiguousClass(_) | Error::UnsupportedClass(_) => "symmetry",
            _ => "bloch",
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
