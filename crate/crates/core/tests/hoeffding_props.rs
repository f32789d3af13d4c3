use proptest::prelude::*;
use sconv::hoeffding::{hoeffding_anti, polar, regime_threshold, ConvexRate, Regime};
use sconv::renyi::{PairSpectra, RenyiVariant};
use sconv::sample::{random_density, seeded};
use sconv::StatePair;

fn qubit_rate(seed: u64) -> (ConvexRate, PairSpectra) {
    let mut rng = seeded(seed);
    let pair = StatePair::new(random_density(2, &mut rng), random_density(2, &mut rng)).unwrap();
    (ConvexRate::from_pair(&pair, RenyiVariant::Sandwiched).unwrap(), PairSpectra::from_pair(&pair).unwrap())
}

fn convex_on(values: &[f64], tol: f64) -> bool {
    values.windows(3).all(|w| w[1] <= 0.5 * (w[0] + w[2]) + tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polar_is_nondecreasing_and_convex(seed in any::<u64>()) {
        let (f, _) = qubit_rate(seed);
        let (lo, hi) = (f.a_min(), f.a_max().expect_finite("a_max"));
        // The polar transform may be +inf at a_max itself, so stop short of it.
        let grid: Vec<f64> = (0..=40).map(|k| lo - 0.2 + (0.98 * (hi - lo) + 0.2) * k as f64 / 40.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&a| polar(&f, a).expect_finite("polar")).collect();
        for (a, v) in grid.iter().zip(&vals) {
            if *a <= lo {
                prop_assert!(v.abs() <= 1e-12);
            }
        }
        prop_assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(convex_on(&vals, 1e-9));
    }

    #[test]
    fn hoeffding_shape(seed in any::<u64>()) {
        let (f, _) = qubit_rate(seed);
        let a_max = f.a_max().expect_finite("a_max");
        let th = regime_threshold(&f).finite();
        let top = th.map_or(2.0 * a_max, |t| 1.5 * t);
        let grid: Vec<f64> = (0..=60).map(|k| top * k as f64 / 60.0).collect();
        let res: Vec<_> = grid.iter().map(|&r| hoeffding_anti(&f, r).unwrap()).collect();
        let vals: Vec<f64> = res.iter().map(|h| h.value).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(convex_on(&vals, 1e-8));
        for h in &res {
            match h.regime {
                Regime::LinearTail => prop_assert!((h.value - (h.r - a_max)).abs() <= 1e-12),
                Regime::Interior => {
                    let a = h.a_r.unwrap();
                    prop_assert!((h.value + a - h.r).abs() <= 1e-9);
                }
                Regime::Zero => prop_assert_eq!(h.value, 0.0),
            }
        }
        if let Some(th) = th {
            let below = hoeffding_anti(&f, th - 1e-10).unwrap().value;
            let above = hoeffding_anti(&f, th + 1e-10).unwrap().value;
            prop_assert!((above - below).abs() <= 1e-8);
        }
    }

    #[test]
    fn matches_optimizing_form(seed in any::<u64>(), frac in -0.2f64..0.95) {
        let (f, ps) = qubit_rate(seed);
        let (lo, hi) = (f.a_min(), f.a_max().expect_finite("a_max"));
        let r = (lo + frac * (hi - lo)).max(0.0);
        let h = hoeffding_anti(&f, r).unwrap().value;
        let mut best: f64 = 0.0;
        let mut alpha = 1.0 + 1e-4;
        while alpha < 1e4 {
            let d = ps.divergence(alpha, RenyiVariant::Sandwiched).unwrap().expect_finite("D*");
            best = best.max((alpha - 1.0) / alpha * (r - d));
            alpha *= 1.0005;
        }
        prop_assert!((h - best).abs() <= 1e-6, "{h} vs {best}");
    }
}
