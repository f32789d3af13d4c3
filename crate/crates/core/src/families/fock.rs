//! Fock-space density of a quasi-free state,
//! `ω_Q = det(I−Q) ⊕_k ∧^k (Q(I−Q)^{−1})`.
//!
//! Basis states are occupation bitmasks with mode 0 in the most significant
//! bit, so a diagonal symbol yields `⊗_i diag(1−λ_i, λ_i)` in the usual
//! tensor ordering.

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::operator::{HermitianOperator, C64};

/// Largest number of modes accepted.
pub const FOCK_MODE_CAP: usize = 12;

/// `det(I−Q) ⊕_k ∧^k(Q(I−Q)^{−1})` on `2^m` dimensions, with
/// `(∧^k A)_{S,T} = det A[S,T]`.
pub fn fock_density(symbol: &HermitianOperator) -> Result<HermitianOperator> {
    let m = symbol.dim();
    if m > FOCK_MODE_CAP {
        return Err(Error::Resource { required: 1usize << m, cap: 1 << FOCK_MODE_CAP });
    }
    let (lo, hi) = (symbol.min_eigenvalue(), symbol.max_eigenvalue());
    if lo <= 0.0 || hi >= 1.0 {
        return Err(domain(format!("symbol spectrum [{lo}, {hi}] is not inside (0, 1)")));
    }
    let det_complement: f64 = symbol.eigenvalues().iter().map(|x| 1.0 - x).product();
    let a = symbol.map_spectrum(|x| x / (1.0 - x));
    let a = a.matrix();

    let dim = 1usize << m;
    let modes_of = |mask: usize| -> Vec<usize> { (0..m).filter(|&i| mask >> (m - 1 - i) & 1 == 1).collect() };
    let mut by_size: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); m + 1];
    for mask in 0..dim {
        let modes = modes_of(mask);
        by_size[modes.len()].push((mask, modes));
    }
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for group in &by_size {
        for (i, (si, s)) in group.iter().enumerate() {
            for (tj, t) in group.iter().skip(i) {
                let k = s.len();
                let value = if k == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    DMatrix::from_fn(k, k, |x, y| a[(s[x], t[y])]).determinant()
                };
                let v = value * det_complement;
                out[(*si, *tj)] = v;
                out[(*tj, *si)] = v.conj();
            }
        }
    }
    HermitianOperator::with_tolerance(out, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{tensor_power, DEFAULT_DIM_CAP};
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_mode() {
        let w = fock_density(&HermitianOperator::diagonal(&[0.3])).unwrap();
        assert_abs_diff_eq!(w.matrix()[(0, 0)].re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(w.matrix()[(1, 1)].re, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn diagonal_symbol_is_product() {
        let lams = [0.2, 0.6, 0.45];
        let w = fock_density(&HermitianOperator::diagonal(&lams)).unwrap();
        let mut want = HermitianOperator::diagonal(&[1.0 - lams[0], lams[0]]);
        for l in &lams[1..] {
            want = want.kron(&HermitianOperator::diagonal(&[1.0 - l, *l]));
        }
        let err = (w.matrix() - want.matrix()).iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        assert!(err < 1e-15);
    }

    #[test]
    fn scalar_symbol_has_binomial_spectrum() {
        let b = 0.35;
        let m = 4;
        let w = fock_density(&HermitianOperator::diagonal(&vec![b; m])).unwrap();
        let single = HermitianOperator::diagonal(&[1.0 - b, b]);
        let prod = tensor_power(&single, m, DEFAULT_DIM_CAP).unwrap();
        for (x, y) in w.eigenvalues().iter().zip(prod.eigenvalues()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn unit_trace_and_basis_covariance() {
        let mut rng = crate::sample::seeded(21);
        let q = crate::sample::rotated(&[0.2, 0.5, 0.7, 0.4], &mut rng);
        let w = fock_density(&q).unwrap();
        assert_abs_diff_eq!(w.trace(), 1.0, epsilon = 1e-10);
        let q2 = crate::sample::rotated(&[0.2, 0.5, 0.7, 0.4], &mut rng);
        let w2 = fock_density(&q2).unwrap();
        for (x, y) in w.eigenvalues().iter().zip(w2.eigenvalues()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }
}
