//! Anonymous single-use tokens with quantum states and classical verification.
//!
//! A bank mints copies of a token state `Σ_i |i⟩|F_S(i)⟩` from a secret
//! string `S`. A holder spends a token by measuring it in the computational
//! basis and sending the classical pair `(I, F_S(I))`; the bank checks the
//! pair against `S` and a history of earlier pairs. Because every holder's
//! report is a uniform sample, the bank cannot tell which copy it came from.
//!
//! * [`quantum`]: sparse statevector simulation, swap tests, reduced density
//!   matrices.
//! * [`scheme`]: parameters, secrets, minting, reports and verification.
//! * [`audit`]: swap-test audits that let holders check two tokens are
//!   identical before spending one.
//! * [`adversary`]: forging users, tracking banks and reference bounds.
//! * [`bank`]: the verification service with its log and TCP protocol.
//! * [`harness`]: seeded Monte Carlo scenarios with CSV output.

pub mod adversary;
pub mod audit;
pub mod bank;
pub mod harness;
pub mod quantum;
pub mod scheme;

pub use adversary::TokenSource;
pub use bank::{Bank, BankClient, BankError, ServerHandle, WireResponse};
pub use harness::{run_scenario, ExperimentResult, HarnessError, MetricRow, Scenario, ScenarioSpec};
pub use quantum::{QuantumError, RegisterLayout, SparseState};
pub use scheme::{SchemeError, SchemeParams, SecretString, SeriesId, TokenReport};
