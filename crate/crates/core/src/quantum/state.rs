use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::density::{DensityMatrix, DEFAULT_DENSITY_LIMIT};
use super::layout::{low_mask, Register, RegisterLayout};
use super::{QuantumError, MAX_QUBITS, NORM_TOLERANCE, PRUNE_THRESHOLD};

/// Normalized pure state over a fixed number of qubits.
///
/// Amplitudes live in a `BTreeMap` so iteration order, and therefore every
/// seeded sampling result, is reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    num_qubits: usize,
    amplitudes: BTreeMap<u64, Complex64>,
}

/// Result of a swap test: the measured bit and the collapsed state.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapOutcome {
    pub bit: u8,
    pub post_state: SparseState,
}

impl SparseState {
    /// The computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: u64) -> Result<Self, QuantumError> {
        check_qubits(num_qubits)?;
        check_index(index, num_qubits)?;
        Ok(Self {
            num_qubits,
            amplitudes: BTreeMap::from([(index, Complex64::new(1.0, 0.0))]),
        })
    }

    /// Builds a state from (index, amplitude) pairs, summing repeated indices,
    /// pruning negligible entries and normalizing.
    pub fn from_amplitudes<I>(num_qubits: usize, amplitudes: I) -> Result<Self, QuantumError>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        check_qubits(num_qubits)?;
        let mut map = BTreeMap::new();
        for (index, amp) in amplitudes {
            check_index(index, num_qubits)?;
            *map.entry(index).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Self::normalized(num_qubits, map)
    }

    /// Builds a state from a dense amplitude vector of length `2^n`.
    pub fn from_dense(amplitudes: &[Complex64]) -> Result<Self, QuantumError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QuantumError::InvalidQubitCount(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        Self::from_amplitudes(
            num_qubits,
            amplitudes.iter().enumerate().map(|(i, a)| (i as u64, *a)),
        )
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self, QuantumError> {
        if num_qubits == 0 || num_qubits > 20 {
            return Err(QuantumError::InvalidQubitCount(num_qubits));
        }
        let dim = 1u64 << num_qubits;
        let amps = (0..dim).map(|i| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (i, Complex64::new(re, im))
        });
        Self::from_amplitudes(num_qubits, amps)
    }

    fn normalized(
        num_qubits: usize,
        mut map: BTreeMap<u64, Complex64>,
    ) -> Result<Self, QuantumError> {
        map.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        let norm_sqr: f64 = map.values().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= PRUNE_THRESHOLD * PRUNE_THRESHOLD {
            return Err(QuantumError::ZeroNorm);
        }
        if (norm_sqr - 1.0).abs() > f64::EPSILON * 8.0 {
            let scale = 1.0 / norm_sqr.sqrt();
            for a in map.values_mut() {
                *a *= scale;
            }
            map.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        }
        Ok(Self {
            num_qubits,
            amplitudes: map,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn nnz(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amplitudes
            .get(&index)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Nonzero amplitudes in increasing basis-index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amplitudes.iter().map(|(i, a)| (*i, *a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// True when Σ|amp|² is within [`NORM_TOLERANCE`] of 1.
    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Dense amplitude vector; refused above `limit` qubits.
    pub fn to_dense(&self, limit: usize) -> Result<Vec<Complex64>, QuantumError> {
        if self.num_qubits > limit {
            return Err(QuantumError::DenseLimitExceeded {
                requested: self.num_qubits,
                limit,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); 1usize << self.num_qubits];
        for (i, a) in self.iter() {
            out[i as usize] = a;
        }
        Ok(out)
    }

    /// `self ⊗ other`; `self` occupies the high bits.
    pub fn tensor(&self, other: &SparseState) -> Result<Self, QuantumError> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_qubits(num_qubits)?;
        let mut map = BTreeMap::new();
        for (x, a) in self.iter() {
            for (y, b) in other.iter() {
                let amp = a * b;
                if amp.norm() >= PRUNE_THRESHOLD {
                    map.insert((x << other.num_qubits) | y, amp);
                }
            }
        }
        Ok(Self {
            num_qubits,
            amplitudes: map,
        })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &SparseState) -> Result<Complex64, QuantumError> {
        self.same_width(other)?;
        let (small, large, conj_small) = if self.nnz() <= other.nnz() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in small.iter() {
            if let Some(b) = large.amplitudes.get(&i) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &SparseState) -> Result<f64, QuantumError> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// Amplitude-wise comparison within `tol`.
    pub fn approx_eq(&self, other: &SparseState, tol: f64) -> bool {
        if self.num_qubits != other.num_qubits {
            return false;
        }
        let close = |a: &SparseState, b: &SparseState| {
            a.iter().all(|(i, x)| (x - b.amplitude(i)).norm() <= tol)
        };
        close(self, other) && close(other, self)
    }

    /// Full computational-basis measurement. The state is not consumed; the
    /// post-measurement state is the basis state of the returned index.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        sample(self.iter().map(|(i, a)| (i, a.norm_sqr())), rng)
    }

    /// Outcome distribution of measuring register `reg`.
    pub fn register_marginal(
        &self,
        layout: &RegisterLayout,
        reg: &str,
    ) -> Result<BTreeMap<u64, f64>, QuantumError> {
        self.check_layout(layout)?;
        let r = layout.register(reg)?;
        let mut marginal = BTreeMap::new();
        for (i, a) in self.iter() {
            *marginal.entry(r.extract(i, self.num_qubits)).or_insert(0.0) += a.norm_sqr();
        }
        Ok(marginal)
    }

    /// Measures one register in the computational basis, returning the
    /// observed value and the renormalized conditional state.
    pub fn measure_register<R: Rng + ?Sized>(
        &self,
        layout: &RegisterLayout,
        reg: &str,
        rng: &mut R,
    ) -> Result<(u64, SparseState), QuantumError> {
        let marginal = self.register_marginal(layout, reg)?;
        let value = sample(marginal.into_iter(), rng);
        let post = self.condition_register(layout, reg, value)?;
        Ok((value, post))
    }

    /// The state conditioned on register `reg` holding `value`.
    pub fn condition_register(
        &self,
        layout: &RegisterLayout,
        reg: &str,
        value: u64,
    ) -> Result<SparseState, QuantumError> {
        self.check_layout(layout)?;
        let r = layout.register(reg)?;
        let map = self
            .amplitudes
            .iter()
            .filter(|(i, _)| r.extract(**i, self.num_qubits) == value)
            .map(|(i, a)| (*i, *a))
            .collect();
        Self::normalized(self.num_qubits, map)
    }

    /// Removes a register that is in a definite basis state (e.g. after it was
    /// measured), returning the remaining state and layout.
    pub fn discard_register(
        &self,
        layout: &RegisterLayout,
        reg: &str,
    ) -> Result<(SparseState, RegisterLayout), QuantumError> {
        self.check_layout(layout)?;
        let r = layout.register(reg)?;
        let n = self.num_qubits;
        let mut values = self.iter().map(|(i, _)| r.extract(i, n));
        let first = values.next().ok_or(QuantumError::ZeroNorm)?;
        if values.any(|v| v != first) {
            return Err(QuantumError::NotCollapsed(reg.to_owned()));
        }
        let rest = layout.without(reg)?;
        let low_bits = n - r.start() - r.width();
        let map = self
            .iter()
            .map(|(i, a)| {
                let high = i >> (low_bits + r.width());
                let low = i & low_mask(low_bits);
                ((high << low_bits) | low, a)
            })
            .collect();
        Ok((Self::normalized(rest.width(), map)?, rest))
    }

    /// Exchanges the bit-fields of two equal-width registers.
    pub fn apply_register_swap(
        &self,
        layout: &RegisterLayout,
        reg_a: &str,
        reg_b: &str,
    ) -> Result<SparseState, QuantumError> {
        self.check_layout(layout)?;
        let (ra, rb) = layout.pair(reg_a, reg_b)?;
        let n = self.num_qubits;
        let map = self.iter().map(|(i, a)| (swap_index(i, ra, rb, n), a)).collect();
        Ok(Self {
            num_qubits: n,
            amplitudes: map,
        })
    }

    /// Exact probability that the swap test on `reg_a`, `reg_b` answers 1,
    /// `‖(v − SWAP v)/2‖² = (1 − Re⟨v|SWAP v⟩)/2`.
    pub fn swap_probability(
        &self,
        layout: &RegisterLayout,
        reg_a: &str,
        reg_b: &str,
    ) -> Result<f64, QuantumError> {
        self.check_layout(layout)?;
        let (ra, rb) = layout.pair(reg_a, reg_b)?;
        let n = self.num_qubits;
        let overlap: f64 = self
            .iter()
            .map(|(i, a)| (a.conj() * self.amplitude(swap_index(i, ra, rb, n))).re)
            .sum();
        Ok(((1.0 - overlap) / 2.0).clamp(0.0, 1.0))
    }

    /// Projects onto the symmetric (`bit = 0`) or antisymmetric (`bit = 1`)
    /// subspace of the register pair. Returns the outcome probability and the
    /// normalized post-state, or `None` when the outcome has negligible weight.
    pub fn swap_project(
        &self,
        layout: &RegisterLayout,
        reg_a: &str,
        reg_b: &str,
        bit: u8,
    ) -> Result<Option<(f64, SparseState)>, QuantumError> {
        self.check_layout(layout)?;
        let (ra, rb) = layout.pair(reg_a, reg_b)?;
        let n = self.num_qubits;
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        let mut map: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (i, a) in self.iter() {
            *map.entry(i).or_insert(Complex64::new(0.0, 0.0)) += a * 0.5;
            *map.entry(swap_index(i, ra, rb, n))
                .or_insert(Complex64::new(0.0, 0.0)) += a * (0.5 * sign);
        }
        map.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        let prob: f64 = map.values().map(|a| a.norm_sqr()).sum();
        if prob <= PRUNE_THRESHOLD {
            return Ok(None);
        }
        Ok(Some((prob.min(1.0), Self::normalized(n, map)?)))
    }

    /// Swap test as a two-outcome projective measurement.
    pub fn swap_test<R: Rng + ?Sized>(
        &self,
        layout: &RegisterLayout,
        reg_a: &str,
        reg_b: &str,
        rng: &mut R,
    ) -> Result<SwapOutcome, QuantumError> {
        let p1 = self.swap_probability(layout, reg_a, reg_b)?;
        let mut bit = u8::from(rng.random::<f64>() < p1);
        let projected = match self.swap_project(layout, reg_a, reg_b, bit)? {
            Some(p) => p,
            None => {
                bit ^= 1;
                self.swap_project(layout, reg_a, reg_b, bit)?
                    .ok_or(QuantumError::ZeroNorm)?
            }
        };
        Ok(SwapOutcome {
            bit,
            post_state: projected.1,
        })
    }

    /// Partial trace keeping `keep` (in the given order), with the default dense limit.
    pub fn reduced_density(
        &self,
        layout: &RegisterLayout,
        keep: &[&str],
    ) -> Result<DensityMatrix, QuantumError> {
        self.reduced_density_with_limit(layout, keep, DEFAULT_DENSITY_LIMIT)
    }

    /// Partial trace over every register not named in `keep`. The kept
    /// registers are concatenated in the order listed, so `["r2", "r1"]`
    /// yields the qubit-permuted marginal.
    pub fn reduced_density_with_limit(
        &self,
        layout: &RegisterLayout,
        keep: &[&str],
        limit: usize,
    ) -> Result<DensityMatrix, QuantumError> {
        self.check_layout(layout)?;
        let mut kept: Vec<&Register> = Vec::with_capacity(keep.len());
        for name in keep {
            let r = layout.register(name)?;
            if kept.iter().any(|k| k.name() == r.name()) {
                return Err(QuantumError::DuplicateRegister((*name).to_owned()));
            }
            kept.push(r);
        }
        let kept_width: usize = kept.iter().map(|r| r.width()).sum();
        if kept_width > limit {
            return Err(QuantumError::DenseLimitExceeded {
                requested: kept_width,
                limit,
            });
        }
        let n = self.num_qubits;
        let kept_mask = kept.iter().fold(0u64, |m, r| m | r.mask(n));
        let mut groups: BTreeMap<u64, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (i, a) in self.iter() {
            let local = kept
                .iter()
                .fold(0u64, |acc, r| (acc << r.width()) | r.extract(i, n));
            groups
                .entry(i & !kept_mask)
                .or_default()
                .push((local as usize, a));
        }
        let dim = 1usize << kept_width;
        let mut rho = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for group in groups.values() {
            for (x, a) in group {
                for (y, b) in group {
                    rho[(*x, *y)] += a * b.conj();
                }
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(rho))
    }

    fn same_width(&self, other: &SparseState) -> Result<(), QuantumError> {
        if self.num_qubits != other.num_qubits {
            return Err(QuantumError::WidthMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(())
    }

    fn check_layout(&self, layout: &RegisterLayout) -> Result<(), QuantumError> {
        if layout.width() != self.num_qubits {
            return Err(QuantumError::LayoutMismatch {
                layout: layout.width(),
                state: self.num_qubits,
            });
        }
        Ok(())
    }
}

fn check_qubits(num_qubits: usize) -> Result<(), QuantumError> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(QuantumError::InvalidQubitCount(num_qubits));
    }
    Ok(())
}

fn check_index(index: u64, num_qubits: usize) -> Result<(), QuantumError> {
    if index > low_mask(num_qubits) {
        return Err(QuantumError::IndexOutOfRange { index, num_qubits });
    }
    Ok(())
}

fn swap_index(index: u64, ra: &Register, rb: &Register, n: usize) -> u64 {
    let va = ra.extract(index, n);
    let vb = rb.extract(index, n);
    rb.replace(ra.replace(index, n, vb), n, va)
}

/// Draws a key with probability proportional to its weight. Keys are visited
/// in iteration order, which keeps seeded draws reproducible.
fn sample<R, I>(weights: I, rng: &mut R) -> u64
where
    R: Rng + ?Sized,
    I: Iterator<Item = (u64, f64)>,
{
    let weights: Vec<(u64, f64)> = weights.collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (key, w) in &weights {
        acc += w;
        if target < acc {
            return *key;
        }
    }
    weights.last().map(|(k, _)| *k).unwrap_or(0)
}
