//! Seeded random operators for property checks and demos.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::operator::{HermitianOperator, C64};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(d: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal absorbed.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let qr = gaussian_matrix(d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random Hermitian matrix with standard Gaussian entries.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> HermitianOperator {
    let g = gaussian_matrix(d, rng);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    HermitianOperator::new(h).expect("Hermitian by construction")
}

/// `U diag(values) U†` for a Haar-random `U`.
pub fn rotated(values: &[f64], rng: &mut impl Rng) -> HermitianOperator {
    let u = random_unitary(values.len(), rng);
    HermitianOperator::from_spectrum(values.to_vec(), u)
}

/// Full-rank density matrix with eigenvalues bounded below by `0.05/d`.
pub fn random_density(d: usize, rng: &mut impl Rng) -> HermitianOperator {
    let raw: Vec<f64> = (0..d).map(|_| 0.05 + rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let values: Vec<f64> = raw.iter().map(|x| x / total).collect();
    rotated(&values, rng)
}

/// Random PSD matrix `G G†` with Gaussian `G`.
pub fn random_psd(d: usize, rng: &mut impl Rng) -> HermitianOperator {
    let g = gaussian_matrix(d, rng);
    HermitianOperator::new(&g * g.adjoint()).expect("Hermitian by construction")
}

/// Random test `0 <= T <= I` with uniform eigenvalues in a random basis.
pub fn random_test_op(d: usize, rng: &mut impl Rng) -> HermitianOperator {
    let values: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    rotated(&values, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(1);
        let u = random_unitary(5, &mut rng);
        let err = (u.adjoint() * &u - DMatrix::<C64>::identity(5, 5)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn density_is_normalized_and_full_rank() {
        let mut rng = seeded(2);
        let rho = random_density(4, &mut rng);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue() > 0.0);
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_hermitian(3, &mut seeded(7));
        let b = random_hermitian(3, &mut seeded(7));
        assert_eq!(a.matrix(), b.matrix());
    }
}
