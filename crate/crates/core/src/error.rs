use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcError {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParam { key: &'static str, reason: String },

    #[error("coincident point: {0}")]
    Coincident(&'static str),

    #[error("Gamma(1 - 2p/q) has a pole at 2p/q = {0}")]
    GammaPole(f64),

    #[error("logarithm argument must be positive, got {0:e}")]
    NonPositiveLog(f64),

    #[error("no convergence after {iterations} iterations (residual {residual:e}{})",
        if *.oscillating { ", oscillating: try a smaller mixing weight" } else { "" })]
    NoConvergence {
        iterations: usize,
        residual: f64,
        oscillating: bool,
    },

    #[error("singular contour kernel at T = {0}")]
    SingularKernel(f64),

    #[error("log-determinant branch lost at T = {t}: phase jump {jump}")]
    BranchTracking { t: f64, jump: f64 },

    #[error("{what} = {got} exceeds the limit {max}")]
    TooLarge { what: &'static str, got: usize, max: usize },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("grid inadequate: {0}")]
    Grid(String),

    #[error("outside the validity domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, LcError>;

pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> LcError {
    LcError::InvalidParam { key, reason: reason.into() }
}
