use super::SchemeError;

/// Largest supported security parameter. The secret for the quantum scheme
/// holds `k·2^k` bits, which is 48 MiB at `k = 24`.
pub const MAX_K: u32 = 24;

/// Parameters of the quantum (repetitive) scheme for security parameter `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams {
    /// Security parameter; a positive multiple of 4.
    pub k: u32,
    /// Qubits per token, `2k`.
    pub n: u32,
    /// Secret length in bits, `k·2^k`.
    pub m: u64,
    /// Tokens per minted series, `2^{k/4} − 1`.
    pub cap_mint: u64,
    /// Verification attempts per series, `2^{k/2}`.
    pub cap_test: u64,
    /// Report length in bits, `2k`.
    pub t: u32,
    /// Correctness failure bound, `2^{-k/2}`.
    pub eps_l: f64,
    /// Forgery success bound, `6·2^{-k/4}`.
    pub eps_f: f64,
}

impl SchemeParams {
    pub fn new(k: u32) -> Result<Self, SchemeError> {
        check_k(k)?;
        Ok(Self {
            k,
            n: 2 * k,
            m: u64::from(k) << k,
            cap_mint: (1u64 << (k / 4)) - 1,
            cap_test: 1u64 << (k / 2),
            t: 2 * k,
            eps_l: 2f64.powi(-(k as i32) / 2),
            eps_f: 6.0 * 2f64.powi(-(k as i32) / 4),
        })
    }

    /// Size of the index space `2^k`.
    pub fn num_indices(&self) -> u64 {
        1u64 << self.k
    }

    /// Mask selecting a `k`-bit value.
    pub fn value_mask(&self) -> u64 {
        self.num_indices() - 1
    }
}

/// Parameters of the classical voucher scheme for security parameter `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalParams {
    pub k: u32,
    /// Bits per token, `k`.
    pub n: u32,
    /// Secret length, `k·2^{k/4}`.
    pub m: u64,
    /// Tokens per series, `2^{k/4}`.
    pub cap_mint: u64,
    /// Verification attempts, `2^{k/2}`.
    pub cap_test: u64,
    /// Report length, `k`.
    pub t: u32,
    /// `2^{-k/2}`.
    pub eps_l: f64,
    /// `2^{-k/4}`.
    pub eps_f: f64,
}

impl ClassicalParams {
    pub fn new(k: u32) -> Result<Self, SchemeError> {
        check_k(k)?;
        let cap_mint = 1u64 << (k / 4);
        Ok(Self {
            k,
            n: k,
            m: u64::from(k) * cap_mint,
            cap_mint,
            cap_test: 1u64 << (k / 2),
            t: k,
            eps_l: 2f64.powi(-(k as i32) / 2),
            eps_f: 2f64.powi(-(k as i32) / 4),
        })
    }
}

fn check_k(k: u32) -> Result<(), SchemeError> {
    if k == 0 || !k.is_multiple_of(4) || k > MAX_K {
        return Err(SchemeError::InvalidK(k));
    }
    Ok(())
}
