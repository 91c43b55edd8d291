use std::path::PathBuf;

use geojsd::DivergenceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },
    #[error(transparent)]
    Math(#[from] DivergenceError),
    #[error("{0} check(s) failed")]
    VerifyFailed(usize),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// 0 ok, 1 verification failure, 2 usage or input, 3 mathematical.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Math(e) if is_math(e) => 3,
            _ => 2,
        }
    }
}

fn is_math(e: &DivergenceError) -> bool {
    use DivergenceError::*;
    matches!(
        e,
        DisjointSupport
            | NotPositiveDefinite
            | NoConvergence { .. }
            | ZeroDensity
            | DomainViolation
            | CumulantUnavailable
            | DegenerateQuadratic
            | ProposalSupportViolation
            | DivergentIntegral
    )
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
