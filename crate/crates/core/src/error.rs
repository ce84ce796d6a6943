use thiserror::Error;

/// Errors raised by every operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown index label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate index label `{0}`")]
    DuplicateLabel(String),
    #[error("index groups do not partition the labels: {0}")]
    NotPartition(String),
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("empty side in bipartition")]
    EmptySide,
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("size cap exceeded: {what} needs {needed} entries, cap is {cap}")]
    SizeCap { what: String, needed: u128, cap: u128 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("tensor is not injective: {0}")]
    NotInjective(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not normalizable: {0}")]
    NotNormalizable(String),
    #[error("eigensolver did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("version mismatch: expected {expected}, found {found}")]
    Version { expected: String, found: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn size_check(what: &str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::SizeCap { what: what.to_string(), needed, cap })
    } else {
        Ok(())
    }
}

/// Per-row outcome in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Indeterminate,
    SizeLimited,
    Error,
}

impl Status {
    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::SizeCap { .. } => Status::SizeLimited,
            _ => Status::Error,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Indeterminate => "indeterminate",
            Status::SizeLimited => "size-limited",
            Status::Error => "error",
        }
    }
}
