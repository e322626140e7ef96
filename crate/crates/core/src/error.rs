use thiserror::Error;

/// Errors raised by the physics and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or input object failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// A mode expansion could not be evaluated at the requested order.
    #[error("mode expansion truncated at l = {order}: {reason}")]
    Truncation { order: usize, reason: String },

    /// Mesh generation failed or produced an unusable mesh.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// The linear solve failed or did not reach the required residual.
    #[error("linear solve failed (relative residual {residual:.3e}): {reason}")]
    Solver { residual: f64, reason: String },

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. } | Error::Mesh(_) | Error::Solver { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
