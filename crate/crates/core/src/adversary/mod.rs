//! Adversaries on both sides: forging users against unforgeability and
//! tracking banks against anonymity, plus the reference bound calculators.

mod bounds;
mod forger;
mod tracking;

pub use bounds::{
    all_correct_bound_exact, eval_all_correct_bound, eval_forgery_bound, eval_forgery_bound_claim,
};
pub use forger::{
    forge_reports, run_forgery, ForgerStrategy, ForgeryOutcome, GuessPolicy, TokenSource,
    FORGER_NAMES,
};
pub use tracking::{
    bank_trace_guess, flag_paired, mint_loaded, mint_permutation_paired, trace_loaded,
    Permutation, Retained, TrackingBankStrategy,
};

use thiserror::Error;

use crate::quantum::QuantumError;
use crate::scheme::SchemeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("ill-formed strategy: {0}")]
    BadStrategy(String),
    #[error("need r > q, got q = {q}, r = {r}")]
    RepetitionsNotAboveSamples { q: u64, r: u64 },
    #[error("range size must be at least 1")]
    EmptyRange,
    #[error("h is not a permutation of the index set")]
    NotBijective,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

impl From<QuantumError> for AdversaryError {
    fn from(e: QuantumError) -> Self {
        AdversaryError::Scheme(SchemeError::Quantum(e))
    }
}
