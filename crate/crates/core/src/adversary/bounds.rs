use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::AdversaryError;

/// `min(1, 5·N·(q + 1)/|Y|)`: chance that `N` queries to a random function
/// yield more than `q` correct input/output pairs after `q` samples.
pub fn eval_forgery_bound(n: u64, q: u64, y_size: u64) -> f64 {
    scaled_bound(5.0, n, q, y_size)
}

/// The same bound with constant 6, the form the scheme's `ε_f` is stated in.
pub fn eval_forgery_bound_claim(n: u64, q: u64, y_size: u64) -> f64 {
    scaled_bound(6.0, n, q, y_size)
}

fn scaled_bound(c: f64, n: u64, q: u64, y_size: u64) -> f64 {
    if y_size == 0 {
        return 1.0;
    }
    (c * n as f64 * (q as f64 + 1.0) / y_size as f64).min(1.0)
}

/// `(1/|Y|^r)·Σ_{i=0}^{q} C(r, i)·(|Y| − 1)^i`, exactly.
pub fn all_correct_bound_exact(q: u64, r: u64, y_size: u64) -> Result<BigRational, AdversaryError> {
    if r <= q {
        return Err(AdversaryError::RepetitionsNotAboveSamples { q, r });
    }
    if y_size == 0 {
        return Err(AdversaryError::EmptyRange);
    }
    let y = BigInt::from(y_size);
    let ym1 = &y - BigInt::one();
    let mut binom = BigInt::one();
    let mut power = BigInt::one();
    let mut sum = BigInt::zero();
    for i in 0..=q {
        if i > 0 {
            binom = binom * BigInt::from(r - i + 1) / BigInt::from(i);
            power *= &ym1;
        }
        sum += &binom * &power;
    }
    let denom = num_traits::pow(y, r as usize);
    Ok(BigRational::new(sum, denom))
}

/// [`all_correct_bound_exact`] rounded to `f64`.
pub fn eval_all_correct_bound(q: u64, r: u64, y_size: u64) -> Result<f64, AdversaryError> {
    let exact = all_correct_bound_exact(q, r, y_size)?;
    Ok(exact.to_f64().unwrap_or(0.0))
}
