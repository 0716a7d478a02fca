//! Token schemes: the classical voucher scheme, the repetitive quantum scheme,
//! the `Report` measurement and the bank's `Test` / `bTest` verification.
//!
//! Indices are 1-based at every public boundary (`I ∈ [1, 2^k]`) and 0-based
//! inside states and secrets.

mod history;
mod params;
mod report;
mod secret;
mod token;

pub use history::VerificationHistory;
pub use params::{ClassicalParams, SchemeParams, MAX_K};
pub use report::{format_value_hex, parse_fixed_hex, TokenReport};
pub use secret::{SecretString, SeriesId};
pub use token::{
    btest, btest_classical, mint, mint_classical, report, report_emulated, test, test_classical,
    token_from_values, token_state, MintedSeries,
};

use thiserror::Error;

use crate::quantum::QuantumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("security parameter k = {0} must be a positive multiple of 4 no larger than the supported maximum")]
    InvalidK(u32),
    #[error("malformed secret: expected {expected_bits} bits, got {actual_bits}")]
    MalformedSecret { expected_bits: u64, actual_bits: u64 },
    #[error("secret has {actual} blocks, this scheme needs {expected}")]
    WrongSecretShape { expected: u64, actual: u64 },
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error("invalid series id {0:?}")]
    InvalidSeriesId(String),
    #[error("report ({index}, {value:#x}) out of range for k = {k}")]
    ReportOutOfRange { index: u64, value: u64, k: u32 },
    #[error("token count must be at least 1")]
    ZeroCount,
    #[error("token has {actual} qubits, expected an even count of at most {max}")]
    TokenWidth { actual: usize, max: usize },
    #[error("{submitted} submissions exceed the verification budget of {budget}")]
    BudgetExceeded { submitted: usize, budget: u64 },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}
