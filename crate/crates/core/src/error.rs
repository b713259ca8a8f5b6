use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("size mismatch in {context}: {left} vs {right}")]
    Size {
        left: usize,
        right: usize,
        context: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    Dim { left: usize, right: usize },

    #[error("instance too large for the exact solver: {atoms} atom pairs (limit {limit})")]
    Scale { atoms: usize, limit: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: &'static str, reason: String },

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("empty measure")]
    EmptyMeasure,

    #[error("operation requires an average-form model")]
    ModelKind,

    #[error("numerical divergence at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    #[error("measure curve does not cover t = {t} (domain [{t_start}, {t_end}])")]
    CurveCoverage { t: f64, t_start: f64, t_end: f64 },

    #[error("fixed-point iteration did not contract within {iters} iterations; residuals {residuals:?}")]
    NonContraction { iters: usize, residuals: Vec<f64> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl CoreError {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::Param {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
