use thiserror::Error;

use crate::model::Violation;

/// Every failure the library reports. The CLI maps these onto exit codes.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("singular matrix (det = {det})")]
    SingularMatrix { det: String },

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("resource limit: {what} needs {count} but the cap is {cap}")]
    ResourceLimit { what: String, count: String, cap: u64 },

    #[error("invalid rho: {rho} must exceed the dual multiplier norm {dual_norm}")]
    InvalidRho { rho: String, dual_norm: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("undecidable: {0}")]
    Undecidable(String),

    #[error("smooth solver did not converge (best gap bound {gap_bound:e})")]
    Unconverged { gap_bound: f64 },

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance is infeasible: {0}")]
    Infeasible(String),

    #[error("invalid instance:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  {}: {}", v.path, v.message))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn limit(what: impl Into<String>, count: impl ToString, cap: u64) -> Self {
        Error::ResourceLimit {
            what: what.into(),
            count: count.to_string(),
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
