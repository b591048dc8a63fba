use thiserror::Error;

/// Errors raised by toolkit operations.
///
/// `Domain` means the inputs are outside an operation's contract (zero ideal,
/// non-squarefree D, evaluation at a pole, ...). `Budget` means an enumeration
/// or quadrature cap was hit; callers may retry with a larger budget.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
