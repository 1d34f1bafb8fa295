use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("jets live at different base points or hbar values")]
    IncompatibleJets,
    #[error("coefficient of total degree {degree} is not available (table degree {available})")]
    Truncation { degree: u32, available: u32 },
    #[error("operation requires base point 0")]
    NonzeroBasepoint,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("branch index {l} out of range for level {m}")]
    BranchOutOfRange { m: u32, l: u64 },
    #[error("series diverges: {0}")]
    Diverging(String),
    #[error("vectors or operators have incompatible cutoffs")]
    CutoffMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroDimension => "zero_dimension",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::IncompatibleJets => "incompatible_jets",
            Error::Truncation { .. } => "truncation",
            Error::NonzeroBasepoint => "nonzero_basepoint",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::BranchOutOfRange { .. } => "branch_out_of_range",
            Error::Diverging(_) => "diverging",
            Error::CutoffMismatch => "cutoff_mismatch",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
