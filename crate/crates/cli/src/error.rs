use std::path::PathBuf;

use thiserror::Error;
use vantage::evolve::EvolveError;
use vantage::explorer::ExploreError;
use vantage::islandgen::IslandError;
use vantage::template::TemplateError;
use vantage::visibility::EvalError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn template(path: &std::path::Path, e: TemplateError) -> Self {
        match e {
            TemplateError::Parse { .. } => CliError::Parse {
                path: path.to_owned(),
                message: e.to_string(),
            },
            TemplateError::Invalid(_) => CliError::Validation(format!("{}: {e}", path.display())),
        }
    }

    pub fn evolve(path: Option<&std::path::Path>, e: EvolveError) -> Self {
        match e {
            EvolveError::Parse { .. } => CliError::Parse {
                path: path.map(ToOwned::to_owned).unwrap_or_default(),
                message: e.to_string(),
            },
            EvolveError::Invariant { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ExploreError> for CliError {
    fn from(e: ExploreError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<IslandError> for CliError {
    fn from(e: IslandError) -> Self {
        CliError::Validation(e.to_string())
    }
}
