use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bgsemi::Error),

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{failed} of {total} criteria failed")]
    Selftest { failed: usize, total: usize },
}

impl CliError {
    pub fn config(detail: impl Into<String>) -> Self {
        CliError::Config(detail.into())
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                bgsemi::Error::Domain { .. } => "domain",
                bgsemi::Error::Parameter { .. } => "parameter",
                bgsemi::Error::Convergence { .. } => "convergence",
                bgsemi::Error::Unsupported { .. } => "unsupported",
                bgsemi::Error::Inapplicable { .. } => "inapplicable",
            },
            CliError::Config(_) => "parameter",
            CliError::Io { .. } => "io",
            CliError::Selftest { .. } => "selftest",
        }
    }

    pub fn op(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.op(),
            CliError::Config(_) => "config",
            CliError::Io { .. } => "output",
            CliError::Selftest { .. } => "selftest",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_convergence() => 3,
            CliError::Core(_) | CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Selftest { .. } => 1,
        }
    }

    /// Single-line `code=… op=… detail=…` record.
    pub fn record(&self) -> String {
        let detail = match self {
            CliError::Core(bgsemi::Error::Domain { detail, .. })
            | CliError::Core(bgsemi::Error::Parameter { detail, .. })
            | CliError::Core(bgsemi::Error::Unsupported { detail, .. })
            | CliError::Core(bgsemi::Error::Inapplicable { detail, .. }) => detail.clone(),
            CliError::Core(bgsemi::Error::Convergence { achieved, detail, .. }) => {
                format!("achieved={achieved:e} {detail}")
            }
            other => other.to_string(),
        };
        format!("code={} op={} detail={}", self.code(), self.op(), detail.replace(['\n', '\r'], " "))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
