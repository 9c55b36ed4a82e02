use thiserror::Error;

/// Errors raised by the fGIG numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FgigError {
    /// An input violates a parameter or domain constraint.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or quadrature routine failed to reach its tolerance.
    #[error("numeric failure in {routine}: {detail} (last residual {residual:e})")]
    Numeric {
        routine: &'static str,
        detail: String,
        residual: f64,
    },

    /// Evaluation requested exactly at a pole.
    #[error("pole at z = {location}: residue {residue}")]
    Pole { location: f64, residue: f64 },
}

impl FgigError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FgigError::Domain(msg.into())
    }

    pub(crate) fn numeric(routine: &'static str, detail: impl Into<String>, residual: f64) -> Self {
        FgigError::Numeric {
            routine,
            detail: detail.into(),
            residual,
        }
    }

    /// True for errors caused by invalid input rather than numerical trouble.
    pub fn is_domain(&self) -> bool {
        matches!(self, FgigError::Domain(_) | FgigError::Pole { .. })
    }
}

pub type Result<T> = std::result::Result<T, FgigError>;
