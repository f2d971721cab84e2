use thiserror::Error;

pub type Result<T> = std::result::Result<T, WpcnError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WpcnError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported path-loss exponent {0} (only alpha = 4 has a closed form here)")]
    UnsupportedAlpha(f64),

    #[error("root is not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("quantization error: U = {u} exceeds V = {v}")]
    Quantization { u: usize, v: usize },

    #[error("battery chain needs {states} states, cap is {cap}")]
    Resource { states: usize, cap: usize },

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> WpcnError {
    WpcnError::Domain(msg.into())
}
