use thiserror::Error;

/// Errors for bath construction, pointwise evaluation and solvers.
///
/// Quadrature non-convergence is deliberately *not* an error: it is reported
/// in-band through [`crate::quadrature::IntegralResult::converged`] so that
/// parameter sweeps can proceed and flag bad cells.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument left the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor was given parameters violating a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The free-evolution decoherence factor is too small for a meaningful
    /// suppression ratio.
    #[error("suppression ratio undefined: free decoherence factor {gamma_free:e} is below 10*abs_tol = {threshold:e}")]
    UndefinedRatio { gamma_free: f64, threshold: f64 },

    /// A bracketed root search found no sign change.
    #[error("no solution bracket on [{lo:e}, {hi:e}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
