use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("non-finite entry in `{0}`")]
    NonFinite(String),

    #[error("grid extents must be at least 1x1, got {rows}x{cols}")]
    EmptyGrid { rows: usize, cols: usize },

    #[error("malformed {what}: {reason}")]
    Format { what: String, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("channel count {channels} is not divisible by n_ssm = {n_ssm}")]
    GroupMismatch { channels: usize, n_ssm: usize },

    #[error("cache was built for {cache} mode but {requested} was requested")]
    ModeMismatch { cache: String, requested: String },

    #[error(
        "unnormalized path counts on a {rows}x{cols} grid exceed 2^53 and are not exact in f64"
    )]
    InexactCoefficients { rows: usize, cols: usize },
}

impl Error {
    pub(crate) fn format(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
