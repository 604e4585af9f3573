//! Error type shared by every module.

use thiserror::Error;

/// Failure classes reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("operation requires a {expected} place")]
    WrongPlace { expected: &'static str },
    #[error("invalid level data: {0}")]
    Level(String),
    #[error("function is not O^x-invariant: {0}")]
    Invariance(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("insufficient p-adic precision: need {needed} digits, have {have}")]
    Precision { needed: u32, have: u32 },
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("pole at s = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("exact mode capacity exceeded: p^(m+n) = {size} > {cap}")]
    Capacity { size: u64, cap: u64 },
    #[error("calibration required before using the digamma route")]
    CalibrationRequired,
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("quadrature or series did not reach tolerance: {0}")]
    Accuracy(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("truncation tail {bound:e} exceeds tolerance; suggested cutoff {suggested}")]
    Truncation { bound: f64, suggested: f64 },
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("data integrity error: {0}")]
    Integrity(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Coarse class used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Integrity,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotPrime(_)
            | Error::WrongPlace { .. }
            | Error::Level(_)
            | Error::Capacity { .. }
            | Error::CalibrationRequired
            | Error::Grid(_)
            | Error::Domain(_) => ErrorClass::Config,
            Error::Integrity(_) | Error::Parse { .. } | Error::Io(_) => ErrorClass::Integrity,
            _ => ErrorClass::Numerical,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
