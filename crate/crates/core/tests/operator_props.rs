use proptest::prelude::*;
use sconv::operator::{
    commutator_norm, pinch, positive_part_trace, power_on_support, tensor_power, CLUSTER_TOL, DEFAULT_DIM_CAP,
};
use sconv::sample::{random_density, random_hermitian, random_psd, seeded};

fn max_entry(m: &nalgebra::DMatrix<num_complex::Complex64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn positive_part_is_monotone(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = seeded(seed);
        let b = random_hermitian(d, &mut rng);
        let a = b.add(&random_psd(d, &mut rng)).unwrap();
        prop_assert!(positive_part_trace(&a) >= positive_part_trace(&b) - 1e-9);
    }

    #[test]
    fn pinching_does_not_increase_positive_part(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = seeded(seed);
        let x = random_hermitian(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let p = pinch(&x, &sigma, CLUSTER_TOL).unwrap();
        prop_assert!(positive_part_trace(&x) >= positive_part_trace(&p) - 1e-9);
    }

    #[test]
    fn pinching_is_idempotent(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = seeded(seed);
        let x = random_hermitian(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let once = pinch(&x, &sigma, CLUSTER_TOL).unwrap();
        let twice = pinch(&once, &sigma, CLUSTER_TOL).unwrap();
        prop_assert!(max_entry(&(once.matrix() - twice.matrix())) <= 1e-12);
    }

    #[test]
    fn powers_add_on_support(seed in any::<u64>(), d in 2usize..5, s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let mut rng = seeded(seed);
        let op = random_density(d, &mut rng);
        let lhs = power_on_support(&op, s).unwrap().matrix() * power_on_support(&op, t).unwrap().matrix();
        let rhs = power_on_support(&op, s + t).unwrap();
        let scale = 1.0 + max_entry(rhs.matrix());
        prop_assert!(max_entry(&(lhs - rhs.matrix())) <= 1e-10 * scale);
    }

    #[test]
    fn pinched_tensor_power_commutes(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = seeded(seed);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(2, &mut rng);
        let rn = tensor_power(&rho, n, DEFAULT_DIM_CAP).unwrap();
        let sn = tensor_power(&sigma, n, DEFAULT_DIM_CAP).unwrap();
        let hat = pinch(&rn, &sn, CLUSTER_TOL).unwrap();
        prop_assert!(commutator_norm(&hat, &sn) <= 1e-10);
    }
}
