use proptest::prelude::*;
use sconv::operator::{commutator_norm, positive_part_trace, tensor_power, CLUSTER_TOL, DEFAULT_DIM_CAP};
use sconv::renyi::{PairSpectra, RenyiVariant};
use sconv::sample::{random_density, seeded};
use sconv::testing::{error_pair, np_test, np_upper_bound_violation, pinched_np_test, ClassicalPair};
use sconv::StatePair;

fn product_pair(seed: u64, n: usize) -> (StatePair, PairSpectra) {
    let mut rng = seeded(seed);
    let rho = random_density(2, &mut rng);
    let sigma = random_density(2, &mut rng);
    let single = PairSpectra::new(&rho, &sigma).unwrap();
    let pair = StatePair::new(
        tensor_power(&rho, n, DEFAULT_DIM_CAP).unwrap(),
        tensor_power(&sigma, n, DEFAULT_DIM_CAP).unwrap(),
    )
    .unwrap();
    (pair, single)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn np_success_dominates_positive_part(seed in any::<u64>(), n in 1usize..5, a in -1.0f64..2.0) {
        let (pair, _) = product_pair(seed, n);
        let t = np_test(&pair, n as f64 * a).unwrap();
        let e = error_pair(&pair, &t, n, a);
        let x = pair.rho().sub_scaled((n as f64 * a).exp(), pair.sigma()).unwrap();
        prop_assert!(e.success >= positive_part_trace(&x) - 1e-12);
    }

    #[test]
    fn np_success_obeys_chernoff_bound(seed in any::<u64>(), n in 1usize..5, a in 0.0f64..2.0) {
        let (pair, single) = product_pair(seed, n);
        let t = np_test(&pair, n as f64 * a).unwrap();
        let e = error_pair(&pair, &t, n, a);
        if e.success > 0.0 {
            let psi: Vec<(f64, f64)> = [1.2, 1.5, 2.0, 3.0, 6.0]
                .iter()
                .map(|&al| (al, n as f64 * single.psi(al, RenyiVariant::Sandwiched).unwrap()))
                .collect();
            prop_assert!(np_upper_bound_violation(&e, n as f64, &psi) <= 1e-9);
        }
    }

    #[test]
    fn pinched_tests_commute_with_sigma(seed in any::<u64>(), n in 1usize..5, a in -0.5f64..1.5) {
        let (pair, _) = product_pair(seed, n);
        let t = pinched_np_test(&pair, n as f64 * a, CLUSTER_TOL).unwrap();
        prop_assert!(commutator_norm(t.op(), pair.sigma()) <= 1e-10);
    }

    #[test]
    fn beta_nonincreasing_in_threshold(seed in any::<u64>(), n in 1usize..5) {
        let (pair, _) = product_pair(seed, n);
        let mut last = f64::INFINITY;
        for k in 0..25 {
            let a = -1.0 + 0.12 * k as f64;
            let b = error_pair(&pair, &np_test(&pair, n as f64 * a).unwrap(), n, a).beta_err;
            prop_assert!(b <= last + 1e-12);
            last = b;
        }
    }

    #[test]
    fn class_route_matches_matrix_route(seed in any::<u64>(), n in 1usize..5, a in -0.5f64..1.5) {
        let mut rng = seeded(seed);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(2, &mut rng);
        let (pair, _) = product_pair(seed, n);
        let t = pinched_np_test(&pair, n as f64 * a, CLUSTER_TOL).unwrap();
        let e = error_pair(&pair, &t, n, a);
        let (classes, _) = ClassicalPair::pinched_iid(&rho, &sigma, n, DEFAULT_DIM_CAP).unwrap();
        let c = classes.np_errors(n as f64 * a, a);
        prop_assert!((e.success - c.success).abs() <= 1e-10);
        prop_assert!((e.beta_err - c.beta_err).abs() <= 1e-10);
    }
}
