//! Seeded Monte Carlo scenarios with CSV output.
//!
//! Trials run on the rayon pool. Each trial draws from its own stream
//! (master seed, trial index) and results are combined by adding integer
//! counts, so a scenario's output depends only on its spec.

mod inequalities;
mod result;
mod rng;
mod scenarios;
pub mod stats;

pub use inequalities::{
    anonymity_family, identical_family, loaded_anonymity_family, mixed_swap_family,
    mixed_swap_slack, pattern_chain_family, pattern_chain_slack, projection_families,
    projection_slacks, run_inequality_suite, swap_chain_family, swap_chain_terms, FamilyReport,
    IdenticalTerms, SuiteSizes, SwapChainTerms, TOLERANCE,
};
pub use result::{ExperimentResult, MetricRow, Relation, CSV_HEADER};
pub use rng::{sub_seed, trial_rng};
pub use scenarios::{pattern_chain_sampled, swap_law_sampled, PatternChainSample, SwapLawSample};

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::{AdversaryError, TokenSource};
use crate::bank::BankError;
use crate::quantum::QuantumError;
use crate::scheme::SchemeError;

/// Largest `k` for quantum token simulation unless explicitly requested.
pub const QUANTUM_DEFAULT_MAX_K: u32 = 6;
/// Largest `k` for quantum token simulation on explicit request.
pub const QUANTUM_OVERRIDE_MAX_K: u32 = 8;
/// Largest `k` for emulated tokens.
pub const EMULATED_MAX_K: u32 = 20;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario {scenario} cannot run at k = {k}: {reason}")]
    IncompatibleK { scenario: Scenario, k: u32, reason: String },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("invalid option for {scenario}: {reason}")]
    BadOption { scenario: Scenario, reason: String },
    #[error("unexpected bank answer: {0}")]
    UnexpectedResponse(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error("writing results: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    HonestFlow,
    AdversarialHistory,
    Forgery,
    TrackingAudit,
    OtpRoundtrip,
    Voting,
    InequalitySuite,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::HonestFlow,
        Scenario::AdversarialHistory,
        Scenario::Forgery,
        Scenario::TrackingAudit,
        Scenario::OtpRoundtrip,
        Scenario::Voting,
        Scenario::InequalitySuite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::HonestFlow => "honest-flow",
            Scenario::AdversarialHistory => "adversarial-history",
            Scenario::Forgery => "forgery",
            Scenario::TrackingAudit => "tracking-audit",
            Scenario::OtpRoundtrip => "otp-roundtrip",
            Scenario::Voting => "voting",
            Scenario::InequalitySuite => "inequality-suite",
        }
    }

    pub fn default_k(&self) -> u32 {
        match self {
            Scenario::HonestFlow | Scenario::TrackingAudit | Scenario::InequalitySuite => 4,
            Scenario::AdversarialHistory | Scenario::OtpRoundtrip | Scenario::Voting => 8,
            Scenario::Forgery => 16,
        }
    }

    pub fn default_trials(&self) -> u64 {
        match self {
            Scenario::OtpRoundtrip | Scenario::Voting | Scenario::InequalitySuite => 1000,
            _ => 100_000,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| HarnessError::UnknownScenario(s.to_owned()))
    }
}

/// Everything needed to rerun a scenario bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub k: u32,
    pub trials: u64,
    pub seed: u64,
    /// Forger or tracking-bank name; `None` runs every strategy.
    pub strategy: Option<String>,
    /// Size of the pre-filled history (adversarial-history only).
    pub history_len: Option<u64>,
    /// `None` picks quantum simulation when `k` allows it.
    pub token_source: Option<TokenSource>,
    pub out: Option<PathBuf>,
}

impl ScenarioSpec {
    /// Spec with the scenario's default `k` and trial count.
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            k: scenario.default_k(),
            trials: scenario.default_trials(),
            seed,
            strategy: None,
            history_len: None,
            token_source: None,
            out: None,
        }
    }

    pub fn k(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn strategy(mut self, name: impl Into<String>) -> Self {
        self.strategy = Some(name.into());
        self
    }

    pub fn history_len(mut self, j: u64) -> Self {
        self.history_len = Some(j);
        self
    }

    pub fn token_source(mut self, source: TokenSource) -> Self {
        self.token_source = Some(source);
        self
    }

    pub fn out(mut self, path: impl Into<PathBuf>) -> Self {
        self.out = Some(path.into());
        self
    }

    /// Token source after applying the `k` limits.
    pub fn resolved_source(&self) -> Result<TokenSource, HarnessError> {
        let k = self.k;
        let incompatible = |reason: String| HarnessError::IncompatibleK {
            scenario: self.scenario,
            k,
            reason,
        };
        let quantum_only = self.scenario == Scenario::TrackingAudit;
        match self.token_source {
            Some(TokenSource::Quantum) if k > QUANTUM_OVERRIDE_MAX_K => Err(incompatible(format!(
                "quantum simulation is limited to k <= {QUANTUM_OVERRIDE_MAX_K}"
            ))),
            Some(TokenSource::Quantum) => Ok(TokenSource::Quantum),
            Some(TokenSource::Emulated) if quantum_only => Err(HarnessError::BadOption {
                scenario: self.scenario,
                reason: "auditing needs quantum tokens".into(),
            }),
            Some(TokenSource::Emulated) if k > EMULATED_MAX_K => Err(incompatible(format!(
                "emulated tokens are limited to k <= {EMULATED_MAX_K}"
            ))),
            Some(TokenSource::Emulated) => Ok(TokenSource::Emulated),
            None if self.scenario == Scenario::Forgery && k <= EMULATED_MAX_K => Ok(TokenSource::Emulated),
            None if k <= QUANTUM_DEFAULT_MAX_K => Ok(TokenSource::Quantum),
            None if quantum_only => Err(incompatible(format!(
                "quantum scenarios require k <= {QUANTUM_DEFAULT_MAX_K} unless quantum tokens are requested explicitly"
            ))),
            None if k <= EMULATED_MAX_K => Ok(TokenSource::Emulated),
            None => Err(incompatible(format!("k must be at most {EMULATED_MAX_K}"))),
        }
    }
}

/// Runs the scenario and writes its CSV when `spec.out` is set.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ExperimentResult, HarnessError> {
    if spec.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let result = match spec.scenario {
        Scenario::InequalitySuite => {
            if spec.strategy.is_some() {
                return Err(HarnessError::BadOption {
                    scenario: spec.scenario,
                    reason: "no strategies".into(),
                });
            }
            run_inequality_suite(spec.seed, SuiteSizes::scaled(spec.trials as usize))?
        }
        _ => scenarios::run(spec)?,
    };
    if let Some(path) = &spec.out {
        result.write_csv(path)?;
    }
    Ok(result)
}

/// Per-trial results that can be summed in any order.
pub(crate) trait Merge: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Runs `trials` independent trials on the rayon pool and sums their results.
pub(crate) fn run_trials<A, F>(seed: u64, tag: &str, trials: u64, f: F) -> Result<A, HarnessError>
where
    A: Merge,
    F: Fn(&mut ChaCha8Rng) -> Result<A, HarnessError> + Sync,
{
    let seed = sub_seed(seed, tag);
    (0..trials)
        .into_par_iter()
        .try_fold(A::default, |mut acc, t| {
            acc.merge(f(&mut trial_rng(seed, t))?);
            Ok(acc)
        })
        .try_reduce(A::default, |mut a, b| {
            a.merge(b);
            Ok(a)
        })
}

/// Sparse histogram over non-negative cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Histogram(BTreeMap<u64, u64>);

impl Histogram {
    pub fn add(&mut self, cell: u64) {
        *self.0.entry(cell).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: Histogram) {
        for (c, n) in other.0 {
            *self.0.entry(c).or_insert(0) += n;
        }
    }

    pub fn dense(&self, cells: u64) -> Vec<u64> {
        let mut v = vec![0u64; cells as usize];
        for (&c, &n) in &self.0 {
            v[c as usize] += n;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_roundtrip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.as_str().parse::<Scenario>().unwrap(), sc);
        }
        assert!("nope".parse::<Scenario>().is_err());
    }

    #[test]
    fn source_limits() {
        let spec = ScenarioSpec::new(Scenario::HonestFlow, 1);
        assert_eq!(spec.resolved_source().unwrap(), TokenSource::Quantum);
        assert_eq!(spec.clone().k(8).resolved_source().unwrap(), TokenSource::Emulated);
        assert_eq!(
            spec.clone().k(8).token_source(TokenSource::Quantum).resolved_source().unwrap(),
            TokenSource::Quantum
        );
        assert!(spec.clone().k(12).token_source(TokenSource::Quantum).resolved_source().is_err());
        assert!(spec.clone().k(24).resolved_source().is_err());
        let track = ScenarioSpec::new(Scenario::TrackingAudit, 1);
        assert!(track.clone().k(8).resolved_source().is_err());
        assert!(track.token_source(TokenSource::Emulated).resolved_source().is_err());
        assert_eq!(
            ScenarioSpec::new(Scenario::Forgery, 1).k(4).resolved_source().unwrap(),
            TokenSource::Emulated
        );
    }

    #[test]
    fn zero_trials_is_an_error() {
        let spec = ScenarioSpec::new(Scenario::Voting, 1).trials(0);
        assert!(matches!(run_scenario(&spec), Err(HarnessError::NoTrials)));
    }
}
