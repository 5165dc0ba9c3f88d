use thiserror::Error;

/// Errors raised while building models, operators and spectra.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("both operands carry a bundle fiber of rank > 1 ({left}, {right})")]
    FiberConflict { left: usize, right: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("degenerate torus modulus: Im(tau) = {im}")]
    DegenerateModulus { im: f64 },

    #[error("cutoff {cutoff} too small for twist k = {k} (need at least {required})")]
    CutoffTooSmall { cutoff: usize, k: i64, required: usize },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("gram matrix of degree {degree} is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    GramNotPositive { degree: i32, min_eigenvalue: f64 },

    #[error("eigensolver failed on degree {degree} (block size {size}, condition estimate {condition:e})")]
    Eigensolver { degree: i32, size: usize, condition: f64 },

    #[error("degree {degree} outside the range of the model (|r| <= {dim})")]
    DegreeOutOfRange { degree: i32, dim: usize },

    #[error("quadrature did not converge: estimates {coarse:e} vs {fine:e}")]
    Quadrature { coarse: f64, fine: f64 },

    #[error("fixture `{name}` is malformed: {reason}")]
    Fixture { name: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
