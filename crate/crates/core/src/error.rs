use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("output index {index} exceeds total photon number {total}")]
    IndexOutOfRange { index: u64, total: u64 },

    #[error("noise model `{0}` is not supported by this operation")]
    UnsupportedModel(String),

    #[error("oracle bound exceeded: n + m = {total} > {bound}")]
    OracleBound { total: u64, bound: u64 },

    #[error("moment matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("invalid tensor function: {0}")]
    InvalidSpec(String),

    #[error("state cutoff {cutoff} exceeds the supported maximum {max}")]
    CutoffExceeded { cutoff: usize, max: usize },

    #[error("no samples supplied")]
    EmptySamples,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
