use serde::Serialize;

/// Why a command failed, and which pipeline stage it failed in.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{source}")]
    Domain {
        stage: &'static str,
        #[source]
        source: nsi_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        stage: &'static str,
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage}: {message}")]
    Format { stage: &'static str, message: String },
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    stage: &'a str,
}

impl CliError {
    /// Process exit code: 1 for usage errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Domain { source, .. } => source.kind(),
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
        }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "arguments",
            CliError::Domain { stage, .. } | CliError::Io { stage, .. } | CliError::Format { stage, .. } => stage,
        }
    }

    /// One-line machine-readable form for the error stream.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorJson {
            error: self.kind(),
            message: self.to_string(),
            stage: self.stage(),
        })
        .expect("error JSON serializes")
    }
}

/// Attaches a stage name to core errors.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for nsi_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Domain { stage, source })
    }
}
