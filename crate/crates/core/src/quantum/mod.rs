//! Sparse pure-state simulation.
//!
//! Token states have `2^k` nonzero amplitudes inside a `2^{2k}`-dimensional
//! space, and joint states of several tokens stay sparse, so states are kept as
//! ordered basis-index → amplitude maps. Dense matrices only appear when a
//! reduced density matrix is requested.
//!
//! All states are normalized. Every sampling operation takes an explicit RNG.

mod density;
mod layout;
mod projection;
mod state;

pub use density::{trace_distance_advantage, DensityMatrix, DEFAULT_DENSITY_LIMIT};
pub(crate) use density::trace_norm_hermitian;
pub use layout::{Register, RegisterLayout};
pub use projection::{random_vector, Subspace};
pub use state::{SparseState, SwapOutcome};

use thiserror::Error;

/// Amplitudes with magnitude below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Allowed deviation of Σ|amplitude|² from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Widest state addressable with a `u64` basis index (one bit of headroom for shifts).
pub const MAX_QUBITS: usize = 62;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("state width mismatch: {left} vs {right} qubits")]
    WidthMismatch { left: usize, right: usize },
    #[error("layout covers {layout} qubits but the state has {state}")]
    LayoutMismatch { layout: usize, state: usize },
    #[error("basis index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: u64, num_qubits: usize },
    #[error("invalid qubit count {0}")]
    InvalidQubitCount(usize),
    #[error("amplitudes have zero norm")]
    ZeroNorm,
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register `{0}` listed twice")]
    DuplicateRegister(String),
    #[error("register `{0}` has zero width")]
    EmptyRegister(String),
    #[error("swap test needs two distinct registers, got `{0}` twice")]
    SameRegister(String),
    #[error("register `{0}` is not in a definite basis state")]
    NotCollapsed(String),
    #[error("dense limit exceeded: {requested} qubits requested, limit is {limit}")]
    DenseLimitExceeded { requested: usize, limit: usize },
    #[error("matrix dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensity(String),
}
