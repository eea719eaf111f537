use thiserror::Error;

/// Errors raised by tensor construction, the Q-transforms, the solver and the
/// text formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimensions {0:?}: every mode must be positive")]
    InvalidDims((usize, usize, usize)),

    #[error("non-finite value at storage offset {0}")]
    NonFinite(usize),

    #[error("rank {r} out of range 1..={max}")]
    RankOutOfRange { r: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not column-orthonormal (max |QᵀQ - I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("observation mask: {0}")]
    InvalidMask(String),

    #[error("input has nonzero entry off the observation mask at ({0}, {1}, {2})")]
    OffMaskEntry(usize, usize, usize),

    #[error("zero tensor not allowed here")]
    ZeroTensor,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
