use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("not a subset: {0}")]
    NotSubset(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("set is not stabilized: {0}")]
    NotStabilized(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid gga: {0}")]
    InvalidGga(String),
    #[error("invalid scaffolding: {0}")]
    InvalidScaffolding(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("truncation limit reached: {0}")]
    Truncation(String),
    #[error("enumeration cap of {0} elements exceeded")]
    CapExceeded(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}
