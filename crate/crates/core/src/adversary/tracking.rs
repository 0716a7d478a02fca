use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use super::AdversaryError;
use crate::quantum::{RegisterLayout, SparseState};
use crate::scheme::{SchemeError, SecretString, TokenReport};

/// How a bank prepares tokens for a user it wants to trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackingBankStrategy {
    /// Hands out identical honest tokens and keeps nothing.
    Honest,
    /// Keeps a `k`-qubit register holding a copy of each traced token's index.
    LoadedEntangled,
    /// Hands out two tokens whose indices are tied by a secret permutation `h`.
    PermutationPaired,
}

impl TrackingBankStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            TrackingBankStrategy::Honest => "honest",
            TrackingBankStrategy::LoadedEntangled => "loaded-entangled",
            TrackingBankStrategy::PermutationPaired => "permutation-paired",
        }
    }

    /// What the bank keeps after minting.
    pub fn retained(&self) -> &'static str {
        match self {
            TrackingBankStrategy::Honest => "nothing",
            TrackingBankStrategy::LoadedEntangled => "k qubits per traced token",
            TrackingBankStrategy::PermutationPaired => "the permutation h, classically",
        }
    }
}

impl fmt::Display for TrackingBankStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrackingBankStrategy {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "honest" => Ok(TrackingBankStrategy::Honest),
            "loaded-entangled" | "loaded" => Ok(TrackingBankStrategy::LoadedEntangled),
            "permutation-paired" | "paired" => Ok(TrackingBankStrategy::PermutationPaired),
            other => Err(AdversaryError::UnknownStrategy(other.to_owned())),
        }
    }
}

/// A bijection on `[0, len)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<u64>,
}

impl Permutation {
    pub fn new(map: Vec<u64>) -> Result<Self, AdversaryError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            let slot = seen
                .get_mut(v as usize)
                .ok_or(AdversaryError::NotBijective)?;
            if std::mem::replace(slot, true) {
                return Err(AdversaryError::NotBijective);
            }
        }
        Ok(Self { map })
    }

    pub fn identity(len: u64) -> Self {
        Self {
            map: (0..len).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(len: u64, rng: &mut R) -> Self {
        let mut map: Vec<u64> = (0..len).collect();
        map.shuffle(rng);
        Self { map }
    }

    pub fn len(&self) -> u64 {
        self.map.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `h(i)` for a 0-based `i`.
    pub fn apply(&self, i: u64) -> u64 {
        self.map[i as usize]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.map
    }
}

/// `Σ_i |i⟩_bank |i, F_S(i)⟩_token / 2^{k/2}`: a token whose index is copied
/// into a `k`-qubit register the bank keeps. Registers `bank` and `token`.
pub fn mint_loaded(secret: &SecretString) -> Result<(SparseState, RegisterLayout), AdversaryError> {
    require_quantum(secret)?;
    let k = secret.k() as usize;
    let size = secret.num_blocks();
    let amp = Complex64::new((size as f64).sqrt().recip(), 0.0);
    let state = SparseState::from_amplitudes(
        3 * k,
        (0..size).map(|i| ((i << (2 * k)) | (i << k) | secret.block(i), amp)),
    )?;
    let layout = RegisterLayout::from_widths(&[("bank", k), ("token", 2 * k)])?;
    Ok((state, layout))
}

/// `Σ_i |i, F_S(i)⟩ |h(i), F_S(h(i))⟩ / 2^{k/2}`: two tokens whose indices are
/// tied by `h`. Registers `token1` and `token2`.
pub fn mint_permutation_paired(
    secret: &SecretString,
    h: &Permutation,
) -> Result<(SparseState, RegisterLayout), AdversaryError> {
    require_quantum(secret)?;
    let size = secret.num_blocks();
    if h.len() != size {
        return Err(AdversaryError::NotBijective);
    }
    let k = secret.k() as usize;
    let amp = Complex64::new((size as f64).sqrt().recip(), 0.0);
    let word = |i: u64| (i << k) | secret.block(i);
    let state = SparseState::from_amplitudes(
        4 * k,
        (0..size).map(|i| ((word(i) << (2 * k)) | word(h.apply(i)), amp)),
    )?;
    let layout = RegisterLayout::from_widths(&[("token1", 2 * k), ("token2", 2 * k)])?;
    Ok((state, layout))
}

/// Loaded bank: measures its retained `bank` register and flags `message`
/// as coming from the traced token iff the indices agree.
pub fn trace_loaded<R: Rng + ?Sized>(
    retained: &SparseState,
    layout: &RegisterLayout,
    message: &TokenReport,
    rng: &mut R,
) -> Result<bool, AdversaryError> {
    let (index, _) = retained.measure_register(layout, "bank", rng)?;
    Ok(index + 1 == message.index())
}

/// Permutation-paired bank: flags `message` when its partner index under `h`
/// (in either direction) appears elsewhere in `history`.
pub fn flag_paired(h: &Permutation, history: &[TokenReport], message: &TokenReport) -> bool {
    let Some(i) = message.index().checked_sub(1).filter(|i| *i < h.len()) else {
        return false;
    };
    history.iter().any(|e| {
        let Some(j) = e.index().checked_sub(1).filter(|j| *j < h.len()) else {
            return false;
        };
        e != message && (h.apply(i) == j || h.apply(j) == i)
    })
}

/// What a tracking bank holds when a verification message arrives.
#[derive(Clone, Copy, Debug)]
pub enum Retained<'a> {
    Nothing,
    Register {
        state: &'a SparseState,
        layout: &'a RegisterLayout,
    },
    Permutation {
        h: &'a Permutation,
        history: &'a [TokenReport],
    },
}

/// Dispatches to the strategy's tracing rule; `true` means "this message
/// comes from the traced user".
pub fn bank_trace_guess<R: Rng + ?Sized>(
    strategy: TrackingBankStrategy,
    retained: Retained<'_>,
    message: &TokenReport,
    rng: &mut R,
) -> Result<bool, AdversaryError> {
    match (strategy, retained) {
        (TrackingBankStrategy::Honest, _) => Err(AdversaryError::BadStrategy(
            "an honest bank keeps nothing to trace with".into(),
        )),
        (TrackingBankStrategy::LoadedEntangled, Retained::Register { state, layout }) => {
            trace_loaded(state, layout, message, rng)
        }
        (TrackingBankStrategy::PermutationPaired, Retained::Permutation { h, history }) => {
            Ok(flag_paired(h, history, message))
        }
        (s, _) => Err(AdversaryError::BadStrategy(format!(
            "retained data does not match strategy {s}"
        ))),
    }
}

fn require_quantum(secret: &SecretString) -> Result<(), AdversaryError> {
    if !secret.is_quantum() {
        return Err(SchemeError::WrongSecretShape {
            expected: 1u64 << secret.k().min(63),
            actual: secret.num_blocks(),
        }
        .into());
    }
    Ok(())
}
