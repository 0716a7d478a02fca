use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::low_mask;
use super::{QuantumError, SparseState, NORM_TOLERANCE};

/// Widest reduced state (in qubits) materialized as a dense matrix by default.
pub const DEFAULT_DENSITY_LIMIT: usize = 12;

/// Dense density matrix of a (possibly mixed) state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wraps a matrix after checking it is Hermitian, unit-trace and PSD.
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self, QuantumError> {
        let rho = Self::from_matrix_unchecked(entries);
        rho.check_invariants()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &SparseState) -> Result<Self, QuantumError> {
        let n = state.num_qubits();
        if n > DEFAULT_DENSITY_LIMIT {
            return Err(QuantumError::DenseLimitExceeded {
                requested: n,
                limit: DEFAULT_DENSITY_LIMIT,
            });
        }
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for (i, a) in state.iter() {
            for (j, b) in state.iter() {
                m[(i as usize, j as usize)] = a * b.conj();
            }
        }
        Ok(Self { entries: m })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Verifies Hermiticity, unit trace and positive semidefiniteness, each
    /// within [`NORM_TOLERANCE`].
    pub fn check_invariants(&self) -> Result<(), QuantumError> {
        let m = &self.entries;
        if !m.is_square() {
            return Err(QuantumError::InvalidDensity("not square".into()));
        }
        let herm_err = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > NORM_TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!(
                "not Hermitian (max deviation {herm_err:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > NORM_TOLERANCE || tr.im.abs() > NORM_TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!("trace {tr}")));
        }
        let min_eig = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min_eig < -NORM_TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, state: &SparseState) -> Result<f64, QuantumError> {
        let dim = self.dim();
        if state.num_qubits() >= 64 || (1usize << state.num_qubits()) != dim {
            return Err(QuantumError::DimMismatch {
                left: dim,
                right: 1usize.checked_shl(state.num_qubits() as u32).unwrap_or(0),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in state.iter() {
            for (j, b) in state.iter() {
                acc += a.conj() * self.entries[(i as usize, j as usize)] * b;
            }
        }
        Ok(acc.re)
    }

    /// Probability that a swap test between the two halves of this state
    /// answers 1: `(1 − Re Tr(ρ·SWAP))/2`.
    pub fn swap_probability(&self) -> Result<f64, QuantumError> {
        let dim = self.dim();
        let qubits = dim.trailing_zeros() as usize;
        if !dim.is_power_of_two() || !qubits.is_multiple_of(2) || qubits == 0 {
            return Err(QuantumError::InvalidQubitCount(qubits));
        }
        let half = qubits / 2;
        let mask = low_mask(half) as usize;
        let tr_swap: f64 = (0..dim)
            .map(|x| {
                let swapped = ((x & mask) << half) | (x >> half);
                self.entries[(x, swapped)].re
            })
            .sum();
        Ok(((1.0 - tr_swap) / 2.0).clamp(0.0, 1.0))
    }

    /// Trace norm `‖self − other‖₁`.
    pub fn trace_norm_distance(&self, other: &DensityMatrix) -> Result<f64, QuantumError> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let diff = &self.entries - &other.entries;
        Ok(trace_norm_hermitian(&diff))
    }
}

/// Optimal probability of telling `r1` from `r2` given one copy chosen
/// uniformly at random: `1/2 + ‖r1 − r2‖₁/4`.
pub fn trace_distance_advantage(
    r1: &DensityMatrix,
    r2: &DensityMatrix,
) -> Result<f64, QuantumError> {
    let norm = r1.trace_norm_distance(r2)?;
    Ok((0.5 + norm / 4.0).clamp(0.5, 1.0))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub(crate) fn trace_norm_hermitian(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|l| l.abs()).sum()
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    // Symmetrize first so rounding noise cannot leak into the solver.
    let herm = (m + m.adjoint()).scale(0.5);
    let mut eig: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}
