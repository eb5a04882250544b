use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: &'static str, detail: String },

    #[error("root not bracketed in [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {grad_norm:e}, best value {best_value})")]
    NoConvergence {
        iterations: usize,
        grad_norm: f64,
        best_value: f64,
        best_point: Vec<f64>,
    },

    #[error("Hessian is not negative definite at the mode: {0}")]
    NotNegativeDefinite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid data: {0}")]
    Data(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
