use thiserror::Error;

use crate::quantum::QubitId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("{what} out of range: {value} not in [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("unsupported layout: {0}")]
    UnsupportedLayout(String),
    #[error("vertex {0} is not in the interaction graph")]
    MissingVertex(QubitId),
    #[error("dense register needs {needed} qubits, ceiling is {ceiling}")]
    DenseCeiling { needed: usize, ceiling: usize },
    #[error("support growth leaves the trackable region: {0}")]
    SupportGrowth(String),
    #[error("non-Clifford gate `{0}` encountered")]
    NonClifford(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("imaginary part {0:e} of a Hermitian expectation exceeds tolerance")]
    NonRealExpectation(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range<T: Into<f64>>(what: &'static str, value: T, lo: T, hi: T) -> Error {
    Error::OutOfRange {
        what,
        value: value.into(),
        lo: lo.into(),
        hi: hi.into(),
    }
}
