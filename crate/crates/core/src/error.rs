use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("malformed number `{0}`")]
    BadNumber(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),

    #[error("variable index {index} out of range for {n_vars} variables")]
    VarOutOfRange { index: usize, n_vars: usize },

    #[error("integer mode requires integral bounds, found {0}")]
    NonIntegral(String),

    #[error("dimension mismatch: {0} vs {1} variables")]
    DimensionMismatch(usize, usize),

    #[error("operands have different numeric modes")]
    ModeMismatch,

    #[error("operands have different variable tables")]
    VarTableMismatch,

    #[error("matrix is not weakly closed")]
    NotWeaklyClosed,

    #[error("non-octagonal expression: {0}")]
    NonOctagonal(String),

    #[error("differential check failed: {0}")]
    Differential(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
