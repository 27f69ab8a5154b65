use sec_core::SecError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] SecError),
    #[error("{file} not found in {dir}; run `sec {stage}` first")]
    MissingArtifact { file: &'static str, dir: String, stage: &'static str },
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::MissingArtifact { .. } => "missing_artifact",
            CliError::Config(_) => "invalid_argument",
        }
    }
}
