//! Exact-arithmetic checks of the projection and swap-test inequalities on
//! random and structured instances.
//!
//! Every check is phrased as a slack `lhs − rhs`; an instance violates the
//! inequality when its slack exceeds [`TOLERANCE`].

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::result::{ExperimentResult, MetricRow, Relation};
use super::rng::{sub_seed, trial_rng};
use super::HarnessError;
use crate::audit::{anonymity_gap, report_chain_cheat_probability, report_prime_cheat_probability};
use crate::quantum::{random_vector, QuantumError, RegisterLayout, SparseState, Subspace};
use crate::scheme::SchemeError;

pub const TOLERANCE: f64 = 1e-9;

const SCENARIO: &str = "inequality-suite";

/// Number of random instances per family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSizes {
    /// Vector/subspace triples, shared by both projection inequalities.
    pub projection: usize,
    pub swap_chain: usize,
    pub mixed_swap: usize,
    pub anonymity: usize,
    pub pattern_chain: usize,
    /// Loaded-token instances for the anonymity bound.
    pub loaded: usize,
    /// Instances with identical token registers.
    pub identical: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            projection: 1000,
            swap_chain: 1000,
            mixed_swap: 200,
            anonymity: 500,
            pattern_chain: 1000,
            loaded: 100,
            identical: 100,
        }
    }
}

impl SuiteSizes {
    /// Default sizes scaled so the projection family has `n` instances.
    pub fn scaled(n: usize) -> Self {
        let d = Self::default();
        let s = |x: usize| (x * n).div_ceil(1000).max(1);
        Self {
            projection: s(d.projection),
            swap_chain: s(d.swap_chain),
            mixed_swap: s(d.mixed_swap),
            anonymity: s(d.anonymity),
            pattern_chain: s(d.pattern_chain),
            loaded: s(d.loaded),
            identical: s(d.identical),
        }
    }
}

/// Slack statistics of one family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyReport {
    pub family: &'static str,
    pub instances: usize,
    /// Instances with slack above [`TOLERANCE`].
    pub violations: usize,
    pub max_slack: f64,
}

impl FamilyReport {
    pub fn from_slacks(family: &'static str, slacks: &[f64]) -> Self {
        Self {
            family,
            instances: slacks.len(),
            violations: slacks.iter().filter(|s| **s > TOLERANCE).count(),
            max_slack: slacks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    fn rows(&self, out: &mut ExperimentResult) {
        let n = self.instances as u64;
        out.push(MetricRow::exact(
            SCENARIO,
            &format!("{}-max-slack", self.family),
            self.family,
            n,
            self.max_slack,
            TOLERANCE,
            Relation::AtMost,
        ));
        out.push(MetricRow::exact(
            SCENARIO,
            &format!("{}-violations", self.family),
            self.family,
            n,
            self.violations as f64,
            0.0,
            Relation::Equal,
        ));
    }
}

/// Both projection slacks for one instance:
/// `‖(v|S₁)|S₂‖ − ‖v|S₂‖` and
/// `‖v|S₂‖² − ‖(v|S₁)|S₂‖² − 2‖v|S₁^⊥‖·‖v‖`.
pub fn projection_slacks(v: &DVector<Complex64>, s1: &Subspace, s2: &Subspace) -> (f64, f64) {
    let both = s2.project(&s1.project(v)).norm();
    let direct = s2.project(v).norm();
    let off = s1.project_complement(v).norm();
    (both - direct, direct * direct - both * both - 2.0 * off * v.norm())
}

/// The three swap-test probabilities of a register chain `r1, r2, r3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapChainTerms {
    /// `Pr[swap test on r1, r2 answers 1]`.
    pub direct: f64,
    /// `Pr[swap test on r2, r3 answers 1]`.
    pub first: f64,
    /// `Pr[swap test on r1, r2 answers 1]` after the test on `r2, r3` answered 0.
    pub second: f64,
    /// `Pr[swap test on r2, r3 answers 0]`.
    pub first_pass: f64,
}

impl SwapChainTerms {
    /// `direct − (first + second)`.
    pub fn slack(&self) -> f64 {
        self.direct - self.first - self.second
    }
}

pub fn swap_chain_terms(
    state: &SparseState,
    layout: &RegisterLayout,
    r1: &str,
    r2: &str,
    r3: &str,
) -> Result<SwapChainTerms, QuantumError> {
    let direct = state.swap_probability(layout, r1, r2)?;
    let first = state.swap_probability(layout, r2, r3)?;
    let (first_pass, second) = match state.swap_project(layout, r2, r3, 0)? {
        Some((p0, post)) => (p0, post.swap_probability(layout, r1, r2)?),
        None => (0.0, 0.0),
    };
    Ok(SwapChainTerms {
        direct,
        first,
        second,
        first_pass,
    })
}

/// `Pr[Report′ on (p, t1) = ⊥] − Pr[chained audit of p against t2, t1 = ⊥]`.
pub fn pattern_chain_slack(
    state: &SparseState,
    layout: &RegisterLayout,
    pattern: &str,
    t1: &str,
    t2: &str,
) -> Result<f64, SchemeError> {
    let prime = report_prime_cheat_probability(state, layout, pattern, t1)?;
    let chain = report_chain_cheat_probability(state, layout, pattern, &[t1, t2])?;
    Ok(prime - chain)
}

/// `1/2 + ‖σ₀₁ − σ₀₂‖₁/4 − (1/2 + √Pr[swap test on r1, r2 answers 1])`.
pub fn mixed_swap_slack(
    state: &SparseState,
    layout: &RegisterLayout,
    r0: &str,
    r1: &str,
    r2: &str,
) -> Result<f64, QuantumError> {
    let gap = anonymity_gap(state, layout, r0, r1, r2)?;
    Ok(gap.advantage - gap.bound)
}

fn three_registers(names: [&str; 3], widths: [usize; 3]) -> RegisterLayout {
    RegisterLayout::from_widths(&[(names[0], widths[0]), (names[1], widths[1]), (names[2], widths[2])])
        .expect("distinct non-empty registers")
}

fn par_slacks<F>(seed: u64, tag: &str, n: usize, f: F) -> Result<Vec<f64>, HarnessError>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64, HarnessError> + Sync,
{
    let seed = sub_seed(seed, tag);
    (0..n as u64).into_par_iter().map(|t| f(&mut trial_rng(seed, t))).collect()
}

/// Random vectors in dimension ≤ 16 (alternately real and complex) against
/// random subspace pairs of random rank. Returns the chain family and the
/// squared-difference family.
pub fn projection_families(seed: u64, n: usize) -> (FamilyReport, FamilyReport) {
    let seed = sub_seed(seed, "projection");
    let pairs: Vec<(f64, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let dim = rng.random_range(1..=16usize);
            let real = t % 2 == 0;
            let v = random_vector(dim, real, &mut rng);
            let s1 = Subspace::random(dim, rng.random_range(0..=dim), real, &mut rng);
            let s2 = Subspace::random(dim, rng.random_range(0..=dim), real, &mut rng);
            projection_slacks(&v, &s1, &s2)
        })
        .collect();
    let chain: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    (
        FamilyReport::from_slacks("projection-chain", &chain),
        FamilyReport::from_slacks("projection-difference", &diff),
    )
}

/// Random pure states on three 2-qubit registers.
pub fn swap_chain_family(seed: u64, n: usize) -> Result<FamilyReport, HarnessError> {
    let layout = three_registers(["r1", "r2", "r3"], [2, 2, 2]);
    let slacks = par_slacks(seed, "swap-chain", n, |rng| {
        let chi = SparseState::random(6, rng)?;
        Ok(swap_chain_terms(&chi, &layout, "r1", "r2", "r3")?.slack())
    })?;
    Ok(FamilyReport::from_slacks("swap-chain", &slacks))
}

/// Random purifications with a 2-qubit reference register and two 2-qubit
/// registers.
pub fn mixed_swap_family(seed: u64, n: usize) -> Result<FamilyReport, HarnessError> {
    let layout = three_registers(["r0", "r1", "r2"], [2, 2, 2]);
    let slacks = par_slacks(seed, "mixed-swap", n, |rng| {
        let chi = SparseState::random(6, rng)?;
        Ok(mixed_swap_slack(&chi, &layout, "r0", "r1", "r2")?)
    })?;
    Ok(FamilyReport::from_slacks("mixed-swap", &slacks))
}

/// Random states with a 2-qubit bank register and two 2-qubit token
/// registers; the slack covers all three distinguishing advantages.
pub fn anonymity_family(seed: u64, n: usize) -> Result<FamilyReport, HarnessError> {
    let layout = three_registers(["r0", "r1", "r2"], [2, 2, 2]);
    let slacks = par_slacks(seed, "anonymity", n, |rng| {
        let chi = SparseState::random(6, rng)?;
        Ok(anonymity_gap(&chi, &layout, "r0", "r1", "r2")?.violation())
    })?;
    Ok(FamilyReport::from_slacks("audited-report-anonymity", &slacks))
}

/// Random states on a pattern register and two token registers, 2 qubits each.
pub fn pattern_chain_family(seed: u64, n: usize) -> Result<FamilyReport, HarnessError> {
    let layout = three_registers(["p", "t1", "t2"], [2, 2, 2]);
    let slacks = par_slacks(seed, "pattern-chain", n, |rng| {
        let chi = SparseState::random(6, rng)?;
        Ok(pattern_chain_slack(&chi, &layout, "p", "t1", "t2")?)
    })?;
    Ok(FamilyReport::from_slacks("pattern-chain", &slacks))
}

/// Bank register entangled with the index of a loaded token, next to an
/// honest token of the same series (`k = 2`, random secret per instance).
/// Returns the family and the largest deviation of `Pr[⊥]` from
/// `(1 − 2^{-k})/2`.
pub fn loaded_anonymity_family(seed: u64, n: usize) -> Result<(FamilyReport, f64), HarnessError> {
    const K: usize = 2;
    let size = 1u64 << K;
    let layout = three_registers(["bank", "honest", "loaded"], [K, 2 * K, 2 * K]);
    let expected_bot = (1.0 - 1.0 / size as f64) / 2.0;
    let seed = sub_seed(seed, "loaded");
    let results: Vec<(f64, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let values: Vec<u64> = (0..size).map(|_| rng.random_range(0..size)).collect();
            let word = |i: u64| (i << K) | values[i as usize];
            let amp = Complex64::new(1.0 / size as f64, 0.0);
            let chi = SparseState::from_amplitudes(
                5 * K,
                (0..size).flat_map(|i| {
                    (0..size).map(move |j| ((i << (4 * K)) | (word(j) << (2 * K)) | word(i), amp))
                }),
            )?;
            let gap = anonymity_gap(&chi, &layout, "bank", "honest", "loaded")?;
            Ok((gap.violation(), (gap.swap_bot - expected_bot).abs()))
        })
        .collect::<Result<_, HarnessError>>()?;
    let slacks: Vec<f64> = results.iter().map(|r| r.0).collect();
    let bot_dev = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((FamilyReport::from_slacks("loaded-anonymity", &slacks), bot_dev))
}

/// Largest term observed when every token register holds the same state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdenticalTerms {
    /// Largest of the three swap-chain probabilities.
    pub swap_chain: f64,
    /// Largest `advantage − 1/2` of the anonymity quantities.
    pub anonymity_excess: f64,
    /// Largest `Pr[⊥]` of the chained audit.
    pub pattern_bot: f64,
}

/// `|β⟩ ⊗ |φ⟩ ⊗ |φ⟩ ⊗ |φ⟩` with random `β` (2 qubits) and `φ` (2 qubits).
pub fn identical_family(seed: u64, n: usize) -> Result<IdenticalTerms, HarnessError> {
    let layout = RegisterLayout::from_widths(&[("r0", 2), ("r1", 2), ("r2", 2), ("r3", 2)])?;
    let three = three_registers(["r0", "r1", "r2"], [2, 2, 2]);
    let seed = sub_seed(seed, "identical");
    let terms: Vec<IdenticalTerms> = (0..n as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let beta = SparseState::random(2, &mut rng)?;
            let phi = SparseState::random(2, &mut rng)?;
            let chi = beta.tensor(&phi)?.tensor(&phi)?.tensor(&phi)?;
            let chain = swap_chain_terms(&chi, &layout, "r1", "r2", "r3")?;
            let gap = anonymity_gap(&beta.tensor(&phi)?.tensor(&phi)?, &three, "r0", "r1", "r2")?;
            let bot = report_chain_cheat_probability(&chi, &layout, "r1", &["r2", "r3"])?;
            Ok(IdenticalTerms {
                swap_chain: chain.direct.max(chain.first).max(chain.second),
                anonymity_excess: gap.advantage.max(gap.reported_advantage).max(gap.swapped_advantage) - 0.5,
                pattern_bot: bot,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(terms.iter().fold(
        IdenticalTerms {
            swap_chain: 0.0,
            anonymity_excess: 0.0,
            pattern_bot: 0.0,
        },
        |a, b| IdenticalTerms {
            swap_chain: a.swap_chain.max(b.swap_chain),
            anonymity_excess: a.anonymity_excess.max(b.anonymity_excess),
            pattern_bot: a.pattern_bot.max(b.pattern_bot),
        },
    ))
}

/// Runs every family and collects one pair of rows per family plus the
/// structured-instance rows.
pub fn run_inequality_suite(seed: u64, sizes: SuiteSizes) -> Result<ExperimentResult, HarnessError> {
    let mut out = ExperimentResult::new();
    let (chain, diff) = projection_families(seed, sizes.projection);
    chain.rows(&mut out);
    diff.rows(&mut out);
    swap_chain_family(seed, sizes.swap_chain)?.rows(&mut out);
    mixed_swap_family(seed, sizes.mixed_swap)?.rows(&mut out);
    anonymity_family(seed, sizes.anonymity)?.rows(&mut out);
    pattern_chain_family(seed, sizes.pattern_chain)?.rows(&mut out);

    let (loaded, bot_dev) = loaded_anonymity_family(seed, sizes.loaded)?;
    loaded.rows(&mut out);
    out.push(MetricRow::exact(
        SCENARIO,
        "loaded-swap-bot-deviation",
        "loaded-anonymity",
        sizes.loaded as u64,
        bot_dev,
        TOLERANCE,
        Relation::AtMost,
    ));

    let same = identical_family(seed, sizes.identical)?;
    let n = sizes.identical as u64;
    for (metric, claim, value) in [
        ("identical-swap-chain-max-term", "swap-chain", same.swap_chain),
        ("identical-anonymity-excess", "audited-report-anonymity", same.anonymity_excess),
        ("identical-pattern-chain-bot", "pattern-chain", same.pattern_bot),
    ] {
        out.push(MetricRow::exact(SCENARIO, metric, claim, n, value, TOLERANCE, Relation::AtMost));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_subspaces_are_tight() {
        // S1 ⊂ S2: projecting onto S1 first loses exactly the S1^⊥ part
        let mut rng = trial_rng(1, 0);
        let v = random_vector(4, true, &mut rng);
        let s = Subspace::random(4, 2, true, &mut rng);
        let (chain, diff) = projection_slacks(&v, &s, &s);
        assert!(chain.abs() < 1e-12);
        assert!(diff <= 0.0);
    }

    #[test]
    fn small_suite_reports_every_family() {
        let res = run_inequality_suite(3, SuiteSizes::scaled(20)).unwrap();
        for family in [
            "projection-chain",
            "projection-difference",
            "swap-chain",
            "mixed-swap",
            "audited-report-anonymity",
            "pattern-chain",
            "loaded-anonymity",
        ] {
            assert!(res.metric(&format!("{family}-max-slack")).is_some(), "{family}");
        }
        assert!(res.metric("identical-swap-chain-max-term").unwrap().pass);
    }
}
