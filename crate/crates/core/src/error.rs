use thiserror::Error;

/// Errors produced anywhere in the TopMix pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: usize, expected: usize, found: usize },

    #[error("line {line}, column `{column}`: token `{token}` is not in the declared domain")]
    SchemaViolation { line: usize, column: String, token: String },

    #[error("line {line}, column `{column}`: cannot parse `{token}` as a finite number")]
    Parse { line: usize, column: String, token: String },

    #[error("column `{0}` is constant over the fit rows")]
    ConstantColumn(String),

    #[error("maxscale too small: {maxscale} is below merge distance {merge_distance}")]
    MaxscaleTooSmall { maxscale: f64, merge_distance: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! contract {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Contract(format!($($arg)+)));
        }
    };
}

pub(crate) use contract;
