use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input: bad ids, probabilities that do not
    /// sum to one, negative utilities, sets outside the ground set.
    #[error("invalid input: {0}")]
    Input(String),

    /// A desk-scale enumeration would exceed its configured cap.
    #[error("capacity exceeded: {what} needs {size}, cap is {cap}")]
    Capacity {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    /// Fails with a capacity error when `size` exceeds `cap`.
    pub(crate) fn check_cap(what: &'static str, size: u128, cap: u128) -> Result<()> {
        if size > cap {
            Err(Error::Capacity { what, size, cap })
        } else {
            Ok(())
        }
    }
}
