use thiserror::Error;

/// Errors raised by the representation, R-matrix and dispersion layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operation requires a quantum-mode deformation parameter (q != 1)")]
    ClassicalMode,

    #[error("|eta| = {eta:e} is below {min:e}; the deformation parameter q must differ from 1")]
    NearClassical { eta: f64, min: f64 },

    #[error("invalid deformation parameter: {0}")]
    InvalidDeformation(String),

    #[error("weight {0} is not dominant")]
    NotDominant(String),

    #[error("invalid representation parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("R-matrix does not intertwine the coproduct: residual {residual:e} exceeds {tol:e}")]
    Intertwiner { residual: f64, tol: f64 },

    #[error("contraction of the R-matrix terms is not scalar: off-scalar residual {residual:e} exceeds {tol:e}")]
    NotScalar { residual: f64, tol: f64 },

    #[error("predicted eigenvalues {a:e} and {b:e} are closer than {tol:e} relative; refusing to merge components")]
    DegenerateSpectrum { a: f64, b: f64, tol: f64 },

    #[error("tensor-square decomposition failed its checks: {0}")]
    Decomposition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no restart converged (out of {restarts})")]
    NonConvergence { restarts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
