use thiserror::Error;

/// Errors raised by constellation construction, detection and coding.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("index {index} out of range for unit {unit} (table size {size})")]
    IndexOutOfRange { unit: usize, index: u32, size: usize },
    #[error("constellation has 2^{bits} points, above the enumeration cap of 2^{cap_bits}")]
    EnumerationCap { bits: u32, cap_bits: u32 },
    #[error("symbol {symbol} is not an element of GF(2^{bits})")]
    OutOfField { symbol: u32, bits: u32 },
    #[error("malformed constellation table: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
