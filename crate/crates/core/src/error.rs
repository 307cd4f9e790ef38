use alloc::string::String;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A qubit index, gate wiring, or tensor layout is malformed.
    #[error("structural error: {0}")]
    Structure(String),
    /// An argument is outside its accepted domain (shape, range, finiteness).
    #[error("validation error: {0}")]
    Validation(String),
    /// A request exceeds a fixed resource budget (qubits, density-matrix size).
    #[error("capacity error: {0}")]
    Capacity(String),
    /// A computation produced a non-finite value.
    #[error("numerical failure at {location}: {detail}")]
    Numerical { location: String, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;

macro_rules! ensure {
    ($cond:expr, $kind:ident, $($arg:tt)*) => {
        let holds: bool = $cond;
        if !holds {
            $crate::error::bail!($kind, $($arg)*);
        }
    };
}
pub(crate) use ensure;
