use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A channel matrix that should have full row rank does not.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// An analytical result was requested outside the regime it holds in.
    /// `code` is a short machine-readable tag such as `T<Mbar`.
    #[error("precondition {code} failed: {detail}")]
    Precondition { code: &'static str, detail: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(code: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            code,
            detail: detail.into(),
        }
    }
}
