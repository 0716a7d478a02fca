//! Pattern-token auditing: `Report′` (swap test against a retained pattern
//! token, then report) and its chained form for a reused pattern.
//!
//! Everything works on a joint state so that tokens entangled with a register
//! held by the bank can be audited.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::quantum::{
    trace_distance_advantage, QuantumError, RegisterLayout, SparseState,
};
use crate::scheme::{SchemeError, TokenReport};

/// Result of an audited report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditOutcome {
    /// A swap test answered 1 (`⊥`).
    CheatDetected,
    Passed(TokenReport),
}

impl AuditOutcome {
    pub fn is_cheat(&self) -> bool {
        matches!(self, AuditOutcome::CheatDetected)
    }

    pub fn report(&self) -> Option<TokenReport> {
        match self {
            AuditOutcome::CheatDetected => None,
            AuditOutcome::Passed(r) => Some(*r),
        }
    }
}

impl fmt::Display for AuditOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditOutcome::CheatDetected => f.write_str("⊥"),
            AuditOutcome::Passed(r) => write!(f, "{r}"),
        }
    }
}

/// Outcome of [`report_prime`] with the joint state left behind. After a
/// pass the token register is collapsed; the pattern register is intact.
#[derive(Clone, Debug)]
pub struct AuditStep {
    pub outcome: AuditOutcome,
    pub state: SparseState,
}

/// Outcome of [`report_chain`]: the swap-test bits in the order performed.
#[derive(Clone, Debug)]
pub struct ChainTrace {
    pub swap_bits: Vec<u8>,
    pub outcome: AuditOutcome,
    pub state: SparseState,
}

/// Swap test of `pattern` against `token`; on answer 1 outputs `⊥`,
/// otherwise measures `token` and reports.
pub fn report_prime<R: Rng + ?Sized>(
    joint: &SparseState,
    layout: &RegisterLayout,
    pattern: &str,
    token: &str,
    rng: &mut R,
) -> Result<AuditStep, SchemeError> {
    let swap = joint.swap_test(layout, pattern, token, rng)?;
    if swap.bit == 1 {
        return Ok(AuditStep {
            outcome: AuditOutcome::CheatDetected,
            state: swap.post_state,
        });
    }
    let (report, state) = report_register(&swap.post_state, layout, token, rng)?;
    Ok(AuditStep {
        outcome: AuditOutcome::Passed(report),
        state,
    })
}

/// Exact `Pr[Report′ = ⊥]`.
pub fn report_prime_cheat_probability(
    joint: &SparseState,
    layout: &RegisterLayout,
    pattern: &str,
    token: &str,
) -> Result<f64, SchemeError> {
    Ok(joint.swap_probability(layout, pattern, token)?)
}

/// Chained audit with a reused pattern. `tokens` lists registers `2, …, k`
/// in order; the pattern is swap-tested against `k, k − 1, …, 2` on the
/// evolving state, aborting at the first answer 1, and register 2 is then
/// reported. With no tokens the pattern itself is reported.
pub fn report_chain<R: Rng + ?Sized>(
    joint: &SparseState,
    layout: &RegisterLayout,
    pattern: &str,
    tokens: &[&str],
    rng: &mut R,
) -> Result<ChainTrace, SchemeError> {
    let mut state = joint.clone();
    let mut swap_bits = Vec::with_capacity(tokens.len());
    for reg in tokens.iter().rev() {
        let swap = state.swap_test(layout, pattern, reg, rng)?;
        swap_bits.push(swap.bit);
        state = swap.post_state;
        if swap.bit == 1 {
            return Ok(ChainTrace {
                swap_bits,
                outcome: AuditOutcome::CheatDetected,
                state,
            });
        }
    }
    let target = tokens.first().copied().unwrap_or(pattern);
    let (report, state) = report_register(&state, layout, target, rng)?;
    Ok(ChainTrace {
        swap_bits,
        outcome: AuditOutcome::Passed(report),
        state,
    })
}

/// Exact `Pr[⊥]` of [`report_chain`], following the outcome-0 branch.
pub fn report_chain_cheat_probability(
    joint: &SparseState,
    layout: &RegisterLayout,
    pattern: &str,
    tokens: &[&str],
) -> Result<f64, SchemeError> {
    let mut state = joint.clone();
    let mut alive = 1.0;
    let mut cheat = 0.0;
    for reg in tokens.iter().rev() {
        let p1 = state.swap_probability(layout, pattern, reg)?;
        cheat += alive * p1;
        match state.swap_project(layout, pattern, reg, 0)? {
            Some((p0, next)) => {
                alive *= p0;
                state = next;
            }
            None => return Ok(cheat.min(1.0)),
        }
    }
    Ok(cheat.min(1.0))
}

/// Exact quantities around the anonymity bound for a state `χ` over a bank
/// register `r0` and two token registers `r1`, `r2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnonymityGap {
    /// `1/2 + ‖σ_{0,1} − σ_{0,2}‖₁/4`: best distinguishing probability given
    /// the bank register and the whole token.
    pub advantage: f64,
    /// Best distinguishing probability given the bank register and the
    /// report of the token (register 1 vs register 2).
    pub reported_advantage: f64,
    /// Best distinguishing probability between the report of register 1 and
    /// the audited report of register 1 after the swap test with register 2.
    pub swapped_advantage: f64,
    /// `Pr[⊥]`, the swap-test answer-1 probability on registers 1, 2.
    pub swap_bot: f64,
    /// `1/2 + √swap_bot`.
    pub bound: f64,
}

impl AnonymityGap {
    /// Largest amount by which any of the three advantages exceeds the bound.
    pub fn violation(&self) -> f64 {
        [self.advantage, self.reported_advantage, self.swapped_advantage]
            .into_iter()
            .map(|a| a - self.bound)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Computes the distinguishing advantages of a bank holding `r0` and the
/// bound `1/2 + √Pr[⊥]` they must respect.
pub fn anonymity_gap(
    chi: &SparseState,
    layout: &RegisterLayout,
    r0: &str,
    r1: &str,
    r2: &str,
) -> Result<AnonymityGap, QuantumError> {
    let swap_bot = chi.swap_probability(layout, r1, r2)?;
    let s01 = chi.reduced_density(layout, &[r0, r1])?;
    let s02 = chi.reduced_density(layout, &[r0, r2])?;
    let advantage = trace_distance_advantage(&s01, &s02)?;

    let x1 = classical_quantum(chi, layout, r0, r1)?;
    let x2 = classical_quantum(chi, layout, r0, r2)?;
    let reported_advantage = cq_advantage(&x1, &x2);

    let mut x21 = Vec::new();
    if let Some((p1, anti)) = chi.swap_project(layout, r1, r2, 1)? {
        x21.push((None, scaled_marginal(&anti, layout, r0, p1)?));
    }
    if let Some((p0, sym)) = chi.swap_project(layout, r1, r2, 0)? {
        for (value, m) in classical_quantum(&sym, layout, r0, r1)? {
            x21.push((value, m * Complex64::new(p0, 0.0)));
        }
    }
    let swapped_advantage = cq_advantage(&x1, &x21);

    Ok(AnonymityGap {
        advantage,
        reported_advantage,
        swapped_advantage,
        swap_bot,
        bound: 0.5 + swap_bot.sqrt(),
    })
}

type CqState = Vec<(Option<u64>, DMatrix<Complex64>)>;

/// `Σ_x |x⟩⟨x| ⊗ p_x ρ_x`: the bank register `r0` jointly with the outcome
/// of measuring `token`, as sub-normalized blocks keyed by outcome.
fn classical_quantum(
    chi: &SparseState,
    layout: &RegisterLayout,
    r0: &str,
    token: &str,
) -> Result<CqState, QuantumError> {
    let marginal = chi.register_marginal(layout, token)?;
    let mut blocks = Vec::with_capacity(marginal.len());
    for (value, p) in marginal {
        if p <= crate::quantum::PRUNE_THRESHOLD {
            continue;
        }
        let cond = chi.condition_register(layout, token, value)?;
        blocks.push((Some(value), scaled_marginal(&cond, layout, r0, p)?));
    }
    Ok(blocks)
}

fn scaled_marginal(
    state: &SparseState,
    layout: &RegisterLayout,
    r0: &str,
    weight: f64,
) -> Result<DMatrix<Complex64>, QuantumError> {
    let rho = state.reduced_density(layout, &[r0])?;
    Ok(rho.entries() * Complex64::new(weight, 0.0))
}

/// Optimal success probability of telling two cq-states apart:
/// `1/2 + Σ_x ‖A_x − B_x‖₁ / 4`.
fn cq_advantage(a: &CqState, b: &CqState) -> f64 {
    let dim = a
        .first()
        .or_else(|| b.first())
        .map(|(_, m)| m.nrows())
        .unwrap_or(1);
    let zero = DMatrix::<Complex64>::zeros(dim, dim);
    let mut keys: Vec<Option<u64>> = a.iter().chain(b.iter()).map(|(x, _)| *x).collect();
    keys.sort_unstable();
    keys.dedup();
    let lookup = |set: &CqState, key: Option<u64>| {
        set.iter().find(|(x, _)| *x == key).map(|(_, m)| m.clone())
    };
    let total: f64 = keys
        .into_iter()
        .map(|x| {
            let da = lookup(a, x).unwrap_or_else(|| zero.clone());
            let db = lookup(b, x).unwrap_or_else(|| zero.clone());
            crate::quantum::trace_norm_hermitian(&(da - db))
        })
        .sum();
    (0.5 + total / 4.0).clamp(0.5, 1.0)
}

/// Measures `reg` and parses the value as a report of a `width/2`-bit index.
fn report_register<R: Rng + ?Sized>(
    state: &SparseState,
    layout: &RegisterLayout,
    reg: &str,
    rng: &mut R,
) -> Result<(TokenReport, SparseState), SchemeError> {
    let width = layout.register(reg)?.width();
    if width % 2 != 0 {
        return Err(SchemeError::TokenWidth {
            actual: width,
            max: crate::quantum::MAX_QUBITS,
        });
    }
    let (value, post) = state.measure_register(layout, reg, rng)?;
    Ok((TokenReport::from_wire((width / 2) as u32, value), post))
}
