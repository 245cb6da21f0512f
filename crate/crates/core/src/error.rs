use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: argument outside domain: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op}: invalid parameter: {detail}")]
    Parameter { op: &'static str, detail: String },

    #[error("{op}: no convergence (achieved {achieved:.3e}): {detail}")]
    Convergence {
        op: &'static str,
        achieved: f64,
        detail: String,
    },

    #[error("{op}: unsupported for this family: {detail}")]
    Unsupported { op: &'static str, detail: String },

    #[error("{op}: inapplicable: {detail}")]
    Inapplicable { op: &'static str, detail: String },
}

impl Error {
    pub fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub fn parameter(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Parameter {
            op,
            detail: detail.into(),
        }
    }

    pub fn convergence(op: &'static str, achieved: f64, detail: impl Into<String>) -> Self {
        Error::Convergence {
            op,
            achieved,
            detail: detail.into(),
        }
    }

    pub fn unsupported(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Unsupported {
            op,
            detail: detail.into(),
        }
    }

    pub fn inapplicable(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Inapplicable {
            op,
            detail: detail.into(),
        }
    }

    /// Name of the operation that failed.
    pub fn op(&self) -> &'static str {
        match self {
            Error::Domain { op, .. }
            | Error::Parameter { op, .. }
            | Error::Convergence { op, .. }
            | Error::Unsupported { op, .. }
            | Error::Inapplicable { op, .. } => op,
        }
    }

    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
