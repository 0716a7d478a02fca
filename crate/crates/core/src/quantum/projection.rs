//! Orthogonal projections onto random subspaces, used by the projection
//! chain-inequality checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Subspace of `C^dim` stored as an orthonormal column basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    dim: usize,
    basis: DMatrix<Complex64>,
}

impl Subspace {
    /// Span of `rank` Gaussian vectors; real-valued when `real` is set.
    pub fn random<R: Rng + ?Sized>(dim: usize, rank: usize, real: bool, rng: &mut R) -> Self {
        let rank = rank.min(dim);
        if rank == 0 {
            return Self {
                dim,
                basis: DMatrix::zeros(dim, 0),
            };
        }
        let m = DMatrix::from_fn(dim, rank, |_, _| gaussian(real, rng));
        let q = m.qr().q();
        Self { dim, basis: q }
    }

    /// Span of the given vectors, which must be linearly independent.
    pub fn span(dim: usize, vectors: &[DVector<Complex64>]) -> Self {
        if vectors.is_empty() {
            return Self {
                dim,
                basis: DMatrix::zeros(dim, 0),
            };
        }
        assert!(vectors.iter().all(|v| v.len() == dim), "vector length must equal dim");
        let m = DMatrix::from_columns(vectors);
        Self { dim, basis: m.qr().q() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `v|_S`.
    pub fn project(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        if self.rank() == 0 {
            return DVector::zeros(self.dim);
        }
        let coeffs = self.basis.adjoint() * v;
        &self.basis * coeffs
    }

    /// `v|_{S^⊥}`.
    pub fn project_complement(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        v - self.project(v)
    }
}

/// Gaussian random vector (not normalized).
pub fn random_vector<R: Rng + ?Sized>(dim: usize, real: bool, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(dim, |_, _| gaussian(real, rng))
}

fn gaussian<R: Rng + ?Sized>(real: bool, rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = Subspace::random(8, 3, false, &mut rng);
        let v = random_vector(8, false, &mut rng);
        let p = s.project(&v);
        let pp = s.project(&p);
        assert_abs_diff_eq!((&p - &pp).norm(), 0.0, epsilon = 1e-12);
        let c = s.project_complement(&v);
        assert_abs_diff_eq!(p.dotc(&c).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = random_vector(4, true, &mut rng);
        let zero = Subspace::random(4, 0, true, &mut rng);
        assert_abs_diff_eq!(zero.project(&v).norm(), 0.0);
        let full = Subspace::random(4, 9, true, &mut rng);
        assert_eq!(full.rank(), 4);
        assert_abs_diff_eq!((full.project(&v) - &v).norm(), 0.0, epsilon = 1e-12);
    }
}
