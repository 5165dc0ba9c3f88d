//! Finite spectral models of the vector-field deformed Dolbeault complex
//! ∂̄ + T·i(v), its Dirac operator, and the oracles its kernels are
//! compared against.

pub mod error;
pub mod deformed;
pub mod exact;
pub mod graded_algebra;
pub mod linalg;
pub mod local_model;
pub mod model;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{ExactScalar, GaussRational, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
