use thiserror::Error;

/// Errors raised by ring, scheme and codec operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands disagree on shape, modulus, component count or ring.
    #[error("structural mismatch: {0}")]
    Structure(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A required root of unity (or root of -1) does not exist.
    #[error("no suitable root: {0}")]
    Existence(String),

    /// The multiplicative depth budget would be exceeded.
    #[error("depth budget exceeded: depth {depth} > max {max}")]
    Depth { depth: u32, max: u32 },

    /// An encoded signal does not leave enough room along an axis.
    #[error("signal does not fit along axis {axis}: needs {needed}, ring degree is {available}")]
    Sizing {
        axis: usize,
        needed: usize,
        available: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! structure_err {
    ($($arg:tt)*) => { $crate::error::Error::Structure(format!($($arg)*)) };
}

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Parameter(format!($($arg)*)) };
}

pub(crate) use param_err;
pub(crate) use structure_err;
