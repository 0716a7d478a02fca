use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::AdversaryError;
use crate::scheme::{btest, report, report_emulated, token_state, SecretString, TokenReport};

/// How a forger fills its submissions beyond the reports it measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuessPolicy {
    /// Uniformly random value at an index it has not measured.
    UniformFresh,
    /// Resubmit measured reports.
    Replay,
    /// A measured value at an unmeasured index, betting on repeated blocks.
    BlockCollision,
}

/// Where the forger's tokens come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenSource {
    /// Build the token state and measure it.
    Quantum,
    /// Sample the honest report distribution directly (large `k`).
    Emulated,
}

/// A forger who measures `q` tokens and submits `guess_budget` reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgerStrategy {
    name: String,
    q: usize,
    guess_budget: usize,
    policy: GuessPolicy,
}

/// Names accepted by [`ForgerStrategy::named`].
pub const FORGER_NAMES: [&str; 4] = ["uniform-guess", "measure-and-guess", "replay", "block-collision"];

impl ForgerStrategy {
    pub fn new(
        name: impl Into<String>,
        q: usize,
        guess_budget: usize,
        policy: GuessPolicy,
    ) -> Result<Self, AdversaryError> {
        if q > guess_budget {
            return Err(AdversaryError::BadStrategy(format!(
                "q = {q} exceeds the submission budget {guess_budget}"
            )));
        }
        Ok(Self {
            name: name.into(),
            q,
            guess_budget,
            policy,
        })
    }

    /// Builds a named strategy spending the full budget `n_t`.
    ///
    /// `uniform-guess` measures nothing; `measure-and-guess` measures `q`
    /// tokens and guesses the rest; `replay` measures `q` and resubmits;
    /// `block-collision` measures `q` and reuses the measured values elsewhere.
    pub fn named(name: &str, q: usize, n_t: usize) -> Result<Self, AdversaryError> {
        let (q, policy) = match name {
            "uniform-guess" => (0, GuessPolicy::UniformFresh),
            "measure-and-guess" => (q, GuessPolicy::UniformFresh),
            "replay" => (q, GuessPolicy::Replay),
            "block-collision" => (q, GuessPolicy::BlockCollision),
            other => return Err(AdversaryError::UnknownStrategy(other.to_owned())),
        };
        Self::new(name, q, n_t, policy)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn guess_budget(&self) -> usize {
        self.guess_budget
    }

    pub fn policy(&self) -> GuessPolicy {
        self.policy
    }
}

impl fmt::Display for ForgerStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (q = {}, budget = {})", self.name, self.q, self.guess_budget)
    }
}

impl FromStr for GuessPolicy {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform-fresh" => Ok(GuessPolicy::UniformFresh),
            "replay" => Ok(GuessPolicy::Replay),
            "block-collision" => Ok(GuessPolicy::BlockCollision),
            other => Err(AdversaryError::UnknownStrategy(other.to_owned())),
        }
    }
}

/// Result of one forgery attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForgeryOutcome {
    pub accepted: usize,
    pub submitted: usize,
    pub measured: usize,
}

impl ForgeryOutcome {
    /// More reports accepted than tokens consumed.
    pub fn win(&self) -> bool {
        self.accepted > self.measured
    }
}

/// Measures `q` tokens of the series and assembles the submission sequence.
pub fn forge_reports<R: Rng + ?Sized>(
    secret: &SecretString,
    strat: &ForgerStrategy,
    source: TokenSource,
    rng: &mut R,
) -> Result<Vec<TokenReport>, AdversaryError> {
    let budget = 1usize << (secret.k() / 2);
    if strat.guess_budget > budget {
        return Err(AdversaryError::BadStrategy(format!(
            "budget {} exceeds N_T = {budget}",
            strat.guess_budget
        )));
    }
    let mut measured = Vec::with_capacity(strat.q);
    match source {
        TokenSource::Quantum => {
            let token = token_state(secret)?;
            for _ in 0..strat.q {
                measured.push(report(&token, rng)?);
            }
        }
        TokenSource::Emulated => {
            for _ in 0..strat.q {
                measured.push(report_emulated(secret, rng));
            }
        }
    }
    let size = secret.num_blocks();
    let mask = size - 1;
    let fresh_index = |rng: &mut R| loop {
        let i = rng.random_range(1..=size);
        if measured.len() as u64 >= size || !measured.iter().any(|m| m.index() == i) {
            break i;
        }
    };
    let mut reports = measured.clone();
    for j in 0..strat.guess_budget - strat.q {
        let guess = match strat.policy {
            GuessPolicy::UniformFresh => {
                let i = fresh_index(rng);
                TokenReport::new(i, rng.random::<u64>() & mask)
            }
            GuessPolicy::Replay => match measured.get(j % measured.len().max(1)) {
                Some(m) => *m,
                None => break,
            },
            GuessPolicy::BlockCollision => match measured.get(j % measured.len().max(1)) {
                Some(m) => TokenReport::new(fresh_index(rng), m.value()),
                None => TokenReport::new(fresh_index(rng), rng.random::<u64>() & mask),
            },
        };
        reports.push(guess);
    }
    Ok(reports)
}

/// One forgery attempt against a fresh history.
pub fn run_forgery<R: Rng + ?Sized>(
    secret: &SecretString,
    strat: &ForgerStrategy,
    source: TokenSource,
    rng: &mut R,
) -> Result<ForgeryOutcome, AdversaryError> {
    let reports = forge_reports(secret, strat, source, rng)?;
    let bits = btest(secret, &reports)?;
    Ok(ForgeryOutcome {
        accepted: bits.iter().filter(|b| **b).count(),
        submitted: reports.len(),
        measured: strat.q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{SchemeParams, SeriesId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn replay_never_wins() {
        let p = SchemeParams::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let strat = ForgerStrategy::named("replay", 1, 16).unwrap();
        for _ in 0..200 {
            let s = SecretString::random_keyed(&p, SeriesId::new("r").unwrap(), &mut rng);
            let out = run_forgery(&s, &strat, TokenSource::Emulated, &mut rng).unwrap();
            assert_eq!(out.submitted, 16);
            assert_eq!(out.accepted, 1);
            assert!(!out.win());
        }
    }

    #[test]
    fn quantum_and_emulated_sources_measure_valid_reports() {
        let p = SchemeParams::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SecretString::random(&p, SeriesId::new("q").unwrap(), &mut rng);
        let strat = ForgerStrategy::new("m", 2, 2, GuessPolicy::UniformFresh).unwrap();
        for source in [TokenSource::Quantum, TokenSource::Emulated] {
            let reports = forge_reports(&s, &strat, source, &mut rng).unwrap();
            assert!(reports.iter().all(|r| s.value_at(r.index()) == Some(r.value())));
        }
    }

    #[test]
    fn fresh_guesses_avoid_measured_indices() {
        let p = SchemeParams::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SecretString::random_keyed(&p, SeriesId::new("f").unwrap(), &mut rng);
        let strat = ForgerStrategy::named("block-collision", 2, 16).unwrap();
        let reports = forge_reports(&s, &strat, TokenSource::Emulated, &mut rng).unwrap();
        let measured: Vec<u64> = reports[..2].iter().map(|r| r.index()).collect();
        assert!(reports[2..].iter().all(|r| !measured.contains(&r.index())));
        assert!(reports[2..].iter().all(|r| r.value() == reports[0].value() || r.value() == reports[1].value()));
    }

    #[test]
    fn budget_is_checked() {
        let p = SchemeParams::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = SecretString::random(&p, SeriesId::new("b").unwrap(), &mut rng);
        let strat = ForgerStrategy::named("uniform-guess", 0, 5).unwrap();
        assert!(run_forgery(&s, &strat, TokenSource::Emulated, &mut rng).is_err());
        assert!(ForgerStrategy::named("nope", 0, 4).is_err());
        assert!(ForgerStrategy::new("x", 3, 2, GuessPolicy::Replay).is_err());
    }
}
