use proptest::prelude::*;
use sconv::families::gibbs::{factorization_certificate, qubit_chain, splits_up_to};
use sconv::families::quasifree::{binary_psi, quasifree_psi_star_singleparticle, toeplitz_block};
use sconv::families::{fock_density, markov_psi_n, MarkovPayload, QuasiFreePayload, Symbol, TrigSymbol};
use sconv::operator::DEFAULT_DIM_CAP;
use sconv::sample::{random_unitary, seeded};
use sconv::HermitianOperator;

fn stochastic(a: f64, b: f64) -> Vec<Vec<f64>> {
    vec![vec![a, 1.0 - a], vec![b, 1.0 - b]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn onsite_gibbs_factorizes_exactly(hx in -1.0f64..1.0, hz in -1.0f64..1.0, beta in 0.1f64..1.5) {
        let payload = qubit_chain(0.0, hx, hz, beta);
        for (m, k, r) in splits_up_to(5) {
            let (u, l) = factorization_certificate(&payload, m, k, r, 1.0, DEFAULT_DIM_CAP).unwrap();
            prop_assert!(u && l);
        }
    }

    #[test]
    fn markov_psi_at_one_vanishes(a in 0.05f64..0.95, b in 0.05f64..0.95, c in 0.05f64..0.95, d in 0.05f64..0.95, n in 1usize..200) {
        let chain = MarkovPayload { states: 2, pi0: vec![0.5, 0.5], pi1: vec![0.3, 0.7], p0: stochastic(a, b), p1: stochastic(c, d) };
        let v = markov_psi_n(&chain, 1.0, n).unwrap().expect_finite("psi");
        prop_assert!(v.abs() <= 1e-12, "{v}");
    }

    #[test]
    fn constant_symbols_are_binary(q in 0.2f64..0.8, r in 0.2f64..0.8, n in 1usize..40, alpha in 1.1f64..6.0) {
        let payload = QuasiFreePayload {
            nu: 1,
            q_symbol: Symbol::Trig(TrigSymbol::constant(q)),
            r_symbol: Symbol::Trig(TrigSymbol::constant(r)),
            c_bound: 0.2,
        };
        let sp = quasifree_psi_star_singleparticle(&payload, n, alpha).unwrap();
        prop_assert!((sp - n as f64 * binary_psi(q, r, alpha)).abs() <= 1e-10 * n as f64);
    }

    #[test]
    fn fock_spectrum_is_basis_covariant(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = seeded(seed);
        let values: Vec<f64> = (0..m).map(|i| 0.15 + 0.7 * (i as f64 + 0.5) / m as f64).collect();
        let q = HermitianOperator::diagonal(&values);
        let u = random_unitary(m, &mut rng);
        let rotated = HermitianOperator::with_tolerance(&u * q.matrix() * u.adjoint(), 1e-12).unwrap();
        let a = fock_density(&q).unwrap();
        let b = fock_density(&rotated).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn toeplitz_compressions_interlace(c0 in 0.4f64..0.6, c1 in -0.1f64..0.1, s1 in -0.1f64..0.1, c2 in -0.05f64..0.05, n in 2usize..24) {
        let t = TrigSymbol { constant: c0, cos_coeffs: vec![c1, c2], sin_coeffs: vec![s1] };
        let bound_lo = c0 - c1.abs() - s1.abs() - c2.abs();
        let bound_hi = c0 + c1.abs() + s1.abs() + c2.abs();
        let symbol = Symbol::Trig(t);
        let small = toeplitz_block(&symbol, 1, n);
        let big = toeplitz_block(&symbol, 1, n + 1);
        let (ls, lb) = (small.eigenvalues(), big.eigenvalues());
        prop_assert!(lb[0] >= bound_lo - 1e-12 && lb[n] <= bound_hi + 1e-12);
        for i in 0..n {
            prop_assert!(lb[i] <= ls[i] + 1e-12 && ls[i] <= lb[i + 1] + 1e-12);
        }
    }
}
