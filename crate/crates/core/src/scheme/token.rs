use num_complex::Complex64;
use rand::Rng;

use super::{SchemeError, SecretString, TokenReport, VerificationHistory};
use crate::quantum::{SparseState, MAX_QUBITS};

/// Tokens handed out for one series.
#[derive(Clone, Debug)]
pub struct MintedSeries {
    pub tokens: Vec<SparseState>,
    /// Set when more than `N_M = 2^{k/4} − 1` tokens were requested.
    pub exceeds_cap: bool,
}

/// `Σ_i |i⟩|value(i)⟩ / 2^{k/2}` over `i ∈ [0, 2^k)`, a `2k`-qubit state.
///
/// Works for any `k ≥ 1`, including the 2-bit toy structures used by the
/// inequality checks. `value` is reduced to `k` bits.
pub fn token_from_values<F>(k: u32, value: F) -> Result<SparseState, SchemeError>
where
    F: Fn(u64) -> u64,
{
    let n = 2 * k as usize;
    if k == 0 || n > MAX_QUBITS {
        return Err(SchemeError::TokenWidth {
            actual: n,
            max: MAX_QUBITS,
        });
    }
    let size = 1u64 << k;
    let mask = size - 1;
    let amp = Complex64::new((size as f64).sqrt().recip(), 0.0);
    let state = SparseState::from_amplitudes(n, (0..size).map(|i| ((i << k) | (value(i) & mask), amp)))?;
    Ok(state)
}

/// The honest token `Σ_i |i − 1⟩|F_S(i)⟩ / 2^{k/2}` for a quantum-scheme secret.
pub fn token_state(secret: &SecretString) -> Result<SparseState, SchemeError> {
    require_quantum(secret)?;
    token_from_values(secret.k(), |i| secret.block(i))
}

/// Mints `count` identical tokens. Exceeding `N_M` is allowed and flagged.
pub fn mint(secret: &SecretString, count: usize) -> Result<MintedSeries, SchemeError> {
    if count == 0 {
        return Err(SchemeError::ZeroCount);
    }
    let token = token_state(secret)?;
    let cap = (1u64 << (secret.k() / 4)) - 1;
    Ok(MintedSeries {
        tokens: vec![token; count],
        exceeds_cap: count as u64 > cap,
    })
}

/// Classical vouchers: the `2^{k/4}` consecutive `k`-bit blocks of `S`.
pub fn mint_classical(secret: &SecretString) -> Result<Vec<u64>, SchemeError> {
    require_classical(secret)?;
    Ok(secret.blocks().collect())
}

/// Measures a `2k`-qubit token in the computational basis and parses `(I, R)`.
pub fn report<R: Rng + ?Sized>(token: &SparseState, rng: &mut R) -> Result<TokenReport, SchemeError> {
    let n = token.num_qubits();
    if !n.is_multiple_of(2) {
        return Err(SchemeError::TokenWidth {
            actual: n,
            max: MAX_QUBITS,
        });
    }
    let outcome = token.measure_all(rng);
    Ok(TokenReport::from_wire((n / 2) as u32, outcome))
}

/// Samples the honest report distribution directly: `I` uniform, `R = F_S(I)`.
pub fn report_emulated<R: Rng + ?Sized>(secret: &SecretString, rng: &mut R) -> TokenReport {
    let index = rng.random_range(1..=secret.num_blocks());
    TokenReport::new(index, secret.block(index - 1))
}

/// `⊤` iff `R = F_S(I)` and `(I, R)` has not been submitted before.
pub fn test(secret: &SecretString, history: &VerificationHistory, report: &TokenReport) -> bool {
    secret.value_at(report.index()) == Some(report.value()) && !history.contains(report)
}

/// `⊤` iff `r` is one of the minted vouchers and was not submitted before.
pub fn test_classical(secret: &SecretString, history: &VerificationHistory<u64>, r: u64) -> bool {
    secret.blocks().any(|b| b == r) && !history.contains(&r)
}

/// Runs `Test` over `reports` in order against a history that grows by every
/// submission. Returns one acceptance bit per position.
pub fn btest(secret: &SecretString, reports: &[TokenReport]) -> Result<Vec<bool>, SchemeError> {
    let budget = 1u64 << (secret.k() / 2);
    check_budget(reports.len(), budget)?;
    let mut history = VerificationHistory::new();
    Ok(reports
        .iter()
        .map(|r| {
            let ok = test(secret, &history, r);
            history.push(*r);
            ok
        })
        .collect())
}

/// `bTest` for the classical scheme.
pub fn btest_classical(secret: &SecretString, reports: &[u64]) -> Result<Vec<bool>, SchemeError> {
    require_classical(secret)?;
    let budget = 1u64 << (secret.k() / 2);
    check_budget(reports.len(), budget)?;
    let mut history = VerificationHistory::new();
    Ok(reports
        .iter()
        .map(|&r| {
            let ok = test_classical(secret, &history, r);
            history.push(r);
            ok
        })
        .collect())
}

fn check_budget(submitted: usize, budget: u64) -> Result<(), SchemeError> {
    if submitted as u64 > budget {
        return Err(SchemeError::BudgetExceeded { submitted, budget });
    }
    Ok(())
}

fn require_quantum(secret: &SecretString) -> Result<(), SchemeError> {
    if !secret.is_quantum() {
        return Err(SchemeError::WrongSecretShape {
            expected: 1u64 << secret.k().min(63),
            actual: secret.num_blocks(),
        });
    }
    Ok(())
}

fn require_classical(secret: &SecretString) -> Result<(), SchemeError> {
    let expected = 1u64 << (secret.k() / 4);
    if secret.num_blocks() != expected {
        return Err(SchemeError::WrongSecretShape {
            expected,
            actual: secret.num_blocks(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{SchemeParams, SeriesId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn secret(k: u32, blocks: &[u64]) -> SecretString {
        SecretString::from_blocks(k, blocks, SeriesId::new("t").unwrap()).unwrap()
    }

    #[test]
    fn minted_token_has_uniform_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = SchemeParams::new(4).unwrap();
        let s = SecretString::random(&p, SeriesId::new("a").unwrap(), &mut rng);
        let series = mint(&s, 2).unwrap();
        assert!(series.exceeds_cap);
        let t = &series.tokens[0];
        assert_eq!(t.nnz(), 16);
        for (idx, amp) in t.iter() {
            assert!((amp.re - 0.25).abs() < 1e-12 && amp.im == 0.0);
            assert_eq!(idx & 0xf, s.block(idx >> 4));
        }
        let ip = series.tokens[0].inner_product(&series.tokens[1]).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_secret_reports_zero_value() {
        let s = secret(4, &[0; 16]);
        let t = token_state(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            assert_eq!(report(&t, &mut rng).unwrap().value(), 0);
        }
    }

    #[test]
    fn basis_token_reports_deterministically() {
        let t = SparseState::basis(8, (5 << 4) | 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(report(&t, &mut rng).unwrap(), TokenReport::new(6, 9));
    }

    #[test]
    fn test_rule_examples() {
        let mut blocks = [0u64; 16];
        blocks[2] = 0b1010;
        let s = secret(4, &blocks);
        let mut h = VerificationHistory::new();
        let r = TokenReport::new(3, 0b1010);
        assert!(test(&s, &h, &r));
        assert!(!test(&s, &h, &TokenReport::new(3, 0b1011)));
        h.push(r);
        assert!(!test(&s, &h, &r));
    }

    #[test]
    fn btest_examples() {
        let s = secret(4, &(0..16).collect::<Vec<_>>());
        let a = TokenReport::new(1, 0);
        let b = TokenReport::new(2, 1);
        assert_eq!(btest(&s, &[a, b]).unwrap(), vec![true, true]);
        assert_eq!(btest(&s, &[a, a]).unwrap(), vec![true, false]);
        assert_eq!(
            btest(&s, &[TokenReport::new(1, 5), TokenReport::new(2, 5)]).unwrap(),
            vec![false, false]
        );
        assert!(matches!(
            btest(&s, &[a; 5]),
            Err(SchemeError::BudgetExceeded { submitted: 5, budget: 4 })
        ));
    }

    #[test]
    fn classical_scheme_examples() {
        // k = 4: 2 vouchers of 4 bits
        let s = SecretString::from_hex(4, 2, "0f", SeriesId::new("c").unwrap()).unwrap();
        assert_eq!(mint_classical(&s).unwrap(), vec![0x0, 0xf]);
        let mut h = VerificationHistory::new();
        assert!(test_classical(&s, &h, 0x0));
        assert!(!test_classical(&s, &h, 0x3));
        h.push(0x0);
        assert!(!test_classical(&s, &h, 0x0));
        assert_eq!(btest_classical(&s, &[0xf, 0xf, 0x0]).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn emulated_report_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = SchemeParams::new(16).unwrap();
        let s = SecretString::random(&p, SeriesId::new("e").unwrap(), &mut rng);
        let r = report_emulated(&s, &mut rng);
        assert!(test(&s, &VerificationHistory::new(), &r));
    }

    #[test]
    fn wrong_shapes_are_rejected() {
        let s = SecretString::from_hex(4, 2, "0f", SeriesId::new("c").unwrap()).unwrap();
        assert!(token_state(&s).is_err());
        let q = secret(4, &[0; 16]);
        assert!(mint_classical(&q).is_err());
        assert!(mint(&q, 0).is_err());
    }
}
