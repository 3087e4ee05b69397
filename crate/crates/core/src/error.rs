use alloc::string::String;

/// Errors raised by the core operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A length, shape or level count does not fit the operation.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A scalar or per-level parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A sampling scheme is inconsistent with the operator it is used with.
    #[error("invalid sampling scheme: {0}")]
    Scheme(String),
    /// A dense materialization or enumeration would exceed its configured cap.
    #[error("size limit exceeded: {0}")]
    Size(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;

/// Checks that `n` is a power of two no smaller than 2.
pub(crate) fn check_pow2(n: usize, what: &str) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        bail!(Dimension, "{what} must be a power of two >= 2, got {n}");
    }
    Ok(())
}
