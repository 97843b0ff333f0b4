use thiserror::Error;

/// Errors from the numerical kernel.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input is finite but outside the supported evaluation window.
    #[error("unsupported range: {what} = {value:e} exceeds |x| <= {limit}")]
    UnsupportedRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    /// Newton refinement of an Airy zero did not converge.
    #[error("zero refinement for index {index} did not converge after {iterations} iterations")]
    ZeroRefinementFailed { index: usize, iterations: usize },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    QuadratureDidNotConverge { achieved: f64, requested: f64 },

    /// Matrix/vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A projected state captured too little norm in the truncated basis.
    #[error("truncated basis captured norm {captured} < required {required}")]
    NormCaptureTooLow { captured: f64, required: f64 },
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}
