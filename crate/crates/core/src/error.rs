use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid code profile: {0}")]
    InvalidProfile(String),

    #[error("stage {stage} out of range (valid: {min}..={max})")]
    StageOutOfRange {
        stage: usize,
        min: usize,
        max: usize,
    },

    #[error("enumeration guard exceeded: {what} = {value}, limit {limit}")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("column index {index} out of range for slot width {width} bits")]
    IndexOutOfRange { index: u64, width: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
