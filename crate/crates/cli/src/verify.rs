//! Invariant suite behind `sconv verify`: a handful of seeded random
//! instances per property, per module.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use sconv::families::gibbs::{factorization_certificate, qubit_chain, splits_up_to};
use sconv::families::quasifree::{binary_psi, quasifree_psi_star_singleparticle};
use sconv::families::{markov_psi_n, MarkovPayload, QuasiFreePayload, Symbol, TrigSymbol};
use sconv::hoeffding::{hoeffding_anti, polar, regime_threshold, sc_lower_bound_curve, ConvexRate, Regime};
use sconv::ldp::{chernoff_upper_at, log_mgf_convex, Reference, WeightLevel, WeightedSampleSequence};
use sconv::operator::{
    commutator_norm, pinch, positive_part_trace, power_on_support, tensor_power, trace_product, CLUSTER_TOL, C64,
    DEFAULT_DIM_CAP,
};
use sconv::renyi::{classical_renyi, PairSpectra, RenyiVariant};
use sconv::sample::{random_density, random_hermitian, random_psd, random_test_op, seeded, SampleRng};
use sconv::testing::{error_pair, np_test, np_upper_bound_violation, pinched_np_test, ClassicalPair};
use sconv::{Extended, StatePair};

use crate::error::CliError;
use crate::table::writer;

pub const DEFAULT_CASES: usize = 8;

type Check = fn(&mut SampleRng) -> Result<(), String>;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: &'static str,
    pub cases: usize,
    pub passed: bool,
    /// First failure, if any.
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: usize,
    pub failed_count: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.failed_count
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = writer(w);
        out.write_record(["module", "check", "cases", "status", "detail"])?;
        for c in &self.checks {
            out.write_record([
                c.module,
                c.name,
                &c.cases.to_string(),
                if c.passed { "pass" } else { "fail" },
                c.detail.as_deref().unwrap_or(""),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn max_entry<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn convex_on(values: &[f64], tol: f64) -> bool {
    values.windows(3).all(|w| w[1] <= 0.5 * (w[0] + w[2]) + tol)
}

fn qubit_pair(rng: &mut SampleRng) -> Result<StatePair, String> {
    StatePair::new(random_density(2, rng), random_density(2, rng)).map_err(s)
}

// operator

fn positive_part_monotone(rng: &mut SampleRng) -> Result<(), String> {
    let d = rng.gen_range(2..5);
    let b = random_hermitian(d, rng);
    let a = b.add(&random_psd(d, rng)).map_err(s)?;
    ensure(positive_part_trace(&a) >= positive_part_trace(&b) - 1e-9, || "Tr A+ < Tr B+ with A >= B".into())
}

fn pinching_contracts_positive_part(rng: &mut SampleRng) -> Result<(), String> {
    let d = rng.gen_range(2..5);
    let x = random_hermitian(d, rng);
    let sigma = random_density(d, rng);
    let once = pinch(&x, &sigma, CLUSTER_TOL).map_err(s)?;
    let twice = pinch(&once, &sigma, CLUSTER_TOL).map_err(s)?;
    ensure(positive_part_trace(&x) >= positive_part_trace(&once) - 1e-9, || "pinching raised Tr X+".into())?;
    ensure(max_entry(&(once.matrix() - twice.matrix())) <= 1e-12, || "pinching is not idempotent".into())
}

fn powers_add(rng: &mut SampleRng) -> Result<(), String> {
    let d = rng.gen_range(2..5);
    let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let op = random_density(d, rng);
    let lhs = power_on_support(&op, a).map_err(s)?.matrix() * power_on_support(&op, b).map_err(s)?.matrix();
    let rhs = power_on_support(&op, a + b).map_err(s)?;
    let err = max_entry(&(lhs - rhs.matrix()));
    ensure(err <= 1e-10 * (1.0 + max_entry(rhs.matrix())), || format!("A^s A^t - A^(s+t) = {err:.3e}"))
}

fn pinched_power_commutes(rng: &mut SampleRng) -> Result<(), String> {
    let n = rng.gen_range(1..5);
    let pair = qubit_pair(rng)?;
    let rn = tensor_power(pair.rho(), n, DEFAULT_DIM_CAP).map_err(s)?;
    let sn = tensor_power(pair.sigma(), n, DEFAULT_DIM_CAP).map_err(s)?;
    let hat = pinch(&rn, &sn, CLUSTER_TOL).map_err(s)?;
    let c = commutator_norm(&hat, &sn);
    ensure(c <= 1e-10, || format!("commutator {c:.3e} at n = {n}"))
}

// renyi

fn data_processing(rng: &mut SampleRng) -> Result<(), String> {
    let d = rng.gen_range(2..4);
    let rho = random_density(d, rng);
    let sigma = random_density(d, rng);
    let ps = PairSpectra::new(&rho, &sigma).map_err(s)?;
    for _ in 0..16 {
        let t = random_test_op(d, rng);
        let pr = trace_product(rho.matrix(), t.matrix()).re;
        let qr = trace_product(sigma.matrix(), t.matrix()).re;
        for alpha in [0.5, 0.8, 1.5, 4.0, 32.0] {
            let q = ps.divergence(alpha, RenyiVariant::Sandwiched).map_err(s)?.expect_finite("D*");
            if let Extended::Finite(c) = classical_renyi(&[pr, 1.0 - pr], &[qr, 1.0 - qr], alpha) {
                ensure(c <= q + 1e-9, || format!("alpha {alpha}: measured {c} > {q}"))?;
            }
        }
    }
    Ok(())
}

fn alpha_grid() -> Vec<f64> {
    (0..=28).map(|k| 1.0 + 127.0 * (k as f64 / 28.0).powi(3) + 1e-3).collect()
}

fn monotone_in_order(rng: &mut SampleRng) -> Result<(), String> {
    let d = rng.gen_range(2..4);
    let ps = PairSpectra::new(&random_density(d, rng), &random_density(d, rng)).map_err(s)?;
    let d1 = ps.relative_entropy().expect_finite("D");
    for v in RenyiVariant::BOTH {
        let vals = alpha_grid()
            .iter()
            .map(|&a| ps.divergence(a, v).map(|x| x.expect_finite("D")))
            .collect::<Result<Vec<_>, _>>()
            .map_err(s)?;
        ensure(vals.windows(2).all(|w| w[1] >= w[0] - 1e-10), || format!("{} divergence decreases", v.name()))?;
        ensure(vals[0] > d1 - 1e-6, || "relative entropy is not the infimum".into())?;
    }
    Ok(())
}

fn sandwiched_below_plain(rng: &mut SampleRng) -> Result<(), String> {
    let d = rng.gen_range(2..4);
    let alpha = rng.gen_range(1.01..20.0);
    let ps = PairSpectra::new(&random_density(d, rng), &random_density(d, rng)).map_err(s)?;
    let a = ps.divergence(alpha, RenyiVariant::Sandwiched).map_err(s)?.expect_finite("D*");
    let b = ps.divergence(alpha, RenyiVariant::Plain).map_err(s)?.expect_finite("D");
    ensure(a <= b + 1e-9, || format!("alpha {alpha}: {a} > {b}"))
}

fn additive_on_powers(rng: &mut SampleRng) -> Result<(), String> {
    let k = rng.gen_range(2..4);
    let alpha = rng.gen_range(0.55..6.0);
    let pair = qubit_pair(rng)?;
    let one = PairSpectra::from_pair(&pair).map_err(s)?;
    let many = PairSpectra::new(
        &tensor_power(pair.rho(), k, DEFAULT_DIM_CAP).map_err(s)?,
        &tensor_power(pair.sigma(), k, DEFAULT_DIM_CAP).map_err(s)?,
    )
    .map_err(s)?;
    for v in RenyiVariant::BOTH {
        let gap = many.psi(alpha, v).map_err(s)? - k as f64 * one.psi(alpha, v).map_err(s)?;
        ensure(gap.abs() <= 1e-8, || format!("{} psi not additive: {gap:.3e}", v.name()))?;
    }
    Ok(())
}

// hoeffding

fn qubit_rate(rng: &mut SampleRng) -> Result<(ConvexRate, PairSpectra), String> {
    let pair = qubit_pair(rng)?;
    Ok((ConvexRate::from_pair(&pair, RenyiVariant::Sandwiched).map_err(s)?, PairSpectra::from_pair(&pair).map_err(s)?))
}

fn polar_shape(rng: &mut SampleRng) -> Result<(), String> {
    let (f, _) = qubit_rate(rng)?;
    let (lo, hi) = (f.a_min(), f.a_max().expect_finite("a_max"));
    let grid: Vec<f64> = (0..=40).map(|k| lo - 0.2 + (0.98 * (hi - lo) + 0.2) * k as f64 / 40.0).collect();
    let vals: Vec<f64> = grid.iter().map(|&a| polar(&f, a).expect_finite("polar")).collect();
    ensure(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12), || "polar transform decreases".into())?;
    ensure(convex_on(&vals, 1e-9), || "polar transform is not convex".into())
}

fn hoeffding_shape(rng: &mut SampleRng) -> Result<(), String> {
    let (f, _) = qubit_rate(rng)?;
    let a_max = f.a_max().expect_finite("a_max");
    let top = regime_threshold(&f).finite().map_or(2.0 * a_max, |t| 1.5 * t);
    let grid: Vec<f64> = (0..=60).map(|k| top * k as f64 / 60.0).collect();
    let res = grid.iter().map(|&r| hoeffding_anti(&f, r)).collect::<Result<Vec<_>, _>>().map_err(s)?;
    let vals: Vec<f64> = res.iter().map(|h| h.value).collect();
    ensure(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12), || "H decreases in r".into())?;
    ensure(convex_on(&vals, 1e-8), || "H is not convex in r".into())?;
    for h in &res {
        if h.regime == Regime::Interior {
            let a = h.a_r.ok_or("interior point without a_r")?;
            ensure((h.value + a - h.r).abs() <= 1e-9, || format!("H != r - a_r at r = {}", h.r))?;
        }
    }
    Ok(())
}

fn optimizing_form(rng: &mut SampleRng) -> Result<(), String> {
    let (f, ps) = qubit_rate(rng)?;
    let frac = rng.gen_range(-0.2..0.95);
    let (lo, hi) = (f.a_min(), f.a_max().expect_finite("a_max"));
    let r = (lo + frac * (hi - lo)).max(0.0);
    let h = hoeffding_anti(&f, r).map_err(s)?.value;
    let curve = sc_lower_bound_curve(&f, r).map_err(s)?;
    let mut best: f64 = 0.0;
    let mut alpha = 1.0 + 1e-4;
    while alpha < 1e4 {
        let d = ps.divergence(alpha, RenyiVariant::Sandwiched).map_err(s)?.expect_finite("D*");
        best = best.max((alpha - 1.0) / alpha * (r - d));
        alpha *= 1.002;
    }
    ensure((h - best).abs() <= 1e-5, || format!("case split {h} vs direct {best}"))?;
    ensure((h - curve).abs() <= 1e-6, || format!("case split {h} vs concave form {curve}"))
}

// families

fn onsite_gibbs_factorizes(rng: &mut SampleRng) -> Result<(), String> {
    let payload = qubit_chain(0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.5));
    for (m, k, r) in splits_up_to(5) {
        let (u, l) = factorization_certificate(&payload, m, k, r, 1.0, DEFAULT_DIM_CAP).map_err(s)?;
        ensure(u && l, || format!("split ({m}, {k}, {r}) fails at eta = 1"))?;
    }
    Ok(())
}

fn stochastic(a: f64, b: f64) -> Vec<Vec<f64>> {
    vec![vec![a, 1.0 - a], vec![b, 1.0 - b]]
}

fn markov_psi_one(rng: &mut SampleRng) -> Result<(), String> {
    let mut p = || rng.gen_range(0.05..0.95);
    let chain = MarkovPayload { states: 2, pi0: vec![0.5, 0.5], pi1: vec![0.3, 0.7], p0: stochastic(p(), p()), p1: stochastic(p(), p()) };
    let n = rng.gen_range(1..200);
    let v = markov_psi_n(&chain, 1.0, n).map_err(s)?.expect_finite("psi");
    ensure(v.abs() <= 1e-12, || format!("psi_n(1) = {v:.3e} at n = {n}"))
}

fn constant_symbols_binary(rng: &mut SampleRng) -> Result<(), String> {
    let (q, r) = (rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8));
    let n = rng.gen_range(1..40);
    let alpha = rng.gen_range(1.1..6.0);
    let payload = QuasiFreePayload {
        nu: 1,
        q_symbol: Symbol::Trig(TrigSymbol::constant(q)),
        r_symbol: Symbol::Trig(TrigSymbol::constant(r)),
        c_bound: 0.2,
    };
    let sp = quasifree_psi_star_singleparticle(&payload, n, alpha).map_err(s)?;
    let want = n as f64 * binary_psi(q, r, alpha);
    ensure((sp - want).abs() <= 1e-10 * n as f64, || format!("{sp} vs {want}"))
}

// testing

fn np_bounds(rng: &mut SampleRng) -> Result<(), String> {
    let n = rng.gen_range(1..5);
    let a = rng.gen_range(0.0..2.0);
    let single = qubit_pair(rng)?;
    let ps = PairSpectra::from_pair(&single).map_err(s)?;
    let pair = StatePair::new(
        tensor_power(single.rho(), n, DEFAULT_DIM_CAP).map_err(s)?,
        tensor_power(single.sigma(), n, DEFAULT_DIM_CAP).map_err(s)?,
    )
    .map_err(s)?;
    let t = np_test(&pair, n as f64 * a).map_err(s)?;
    let e = error_pair(&pair, &t, n, a);
    let x = pair.rho().sub_scaled((n as f64 * a).exp(), pair.sigma()).map_err(s)?;
    ensure(e.success >= positive_part_trace(&x) - 1e-12, || "success below the positive part".into())?;
    if e.success > 0.0 {
        let psi = [1.2, 1.5, 2.0, 3.0, 6.0]
            .iter()
            .map(|&al| ps.psi(al, RenyiVariant::Sandwiched).map(|p| (al, n as f64 * p)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(s)?;
        let v = np_upper_bound_violation(&e, n as f64, &psi);
        ensure(v <= 1e-9, || format!("Chernoff-type bound violated by {v:.3e}"))?;
    }
    let tp = pinched_np_test(&pair, n as f64 * a, CLUSTER_TOL).map_err(s)?;
    ensure(commutator_norm(tp.op(), pair.sigma()) <= 1e-10, || "pinched test does not commute with sigma".into())
}

fn beta_monotone(rng: &mut SampleRng) -> Result<(), String> {
    let p = rng.gen_range(0.05..0.95);
    let q = rng.gen_range(0.05..0.95);
    let n = rng.gen_range(1..40);
    let cp = ClassicalPair::iid(&[p, 1.0 - p], &[q, 1.0 - q], n).map_err(s)?;
    let mut last = f64::INFINITY;
    for k in 0..40 {
        let a = -2.0 + 0.1 * k as f64;
        let b = cp.np_errors(n as f64 * a, a).beta_err;
        ensure(b <= last + 1e-15, || format!("beta increases at a = {a}"))?;
        last = b;
    }
    Ok(())
}

// ldp

fn log_mgf_convexity(rng: &mut SampleRng) -> Result<(), String> {
    let k = rng.gen_range(1..12);
    let atoms: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-5.0..5.0))).collect();
    let level = WeightLevel::new(1, rng.gen_range(0.5..20.0), atoms).map_err(s)?;
    let grid: Vec<f64> = (-30..=30).map(|k| k as f64 * 0.1).collect();
    ensure(log_mgf_convex(&level, &grid).map_err(s)?, || "log-MGF is not midpoint convex".into())
}

fn chernoff_dominates(rng: &mut SampleRng) -> Result<(), String> {
    let p = rng.gen_range(0.1..0.9);
    let x = rng.gen_range(0.0..1.0);
    let n = 1usize << rng.gen_range(3..10);
    let seq = WeightedSampleSequence::binomial(&[n], p).map_err(s)?;
    let level = &seq.levels()[0];
    let grid: Vec<f64> = (0..=80).map(|k| k as f64 * 0.1).collect();
    let bound = chernoff_upper_at(level, x, &grid).map_err(s)?;
    let exact = level.upper_tail_rate(x);
    ensure(exact <= bound + 1e-12, || format!("tail rate {exact} above bound {bound}"))
}

fn legendre_duality(rng: &mut SampleRng) -> Result<(), String> {
    let p = rng.gen_range(0.1..0.9);
    let t = rng.gen_range(-3.0..3.0);
    let seq = WeightedSampleSequence::binomial(&[128, 256], p).map_err(s)?;
    let res = seq.rate_curve().duality_residual(t).map_err(s)?;
    ensure(res.abs() <= 1e-8, || format!("duality residual {res:.3e}"))
}

fn pinched_log_mgf(rng: &mut SampleRng) -> Result<(), String> {
    let n = rng.gen_range(1..7);
    let t = rng.gen_range(0.2..4.0);
    let rho = random_density(2, rng);
    let sigma = random_density(2, rng);
    let (classes, _) = ClassicalPair::pinched_iid(&rho, &sigma, n, 4096).map_err(s)?;
    let seq = WeightedSampleSequence::from_classes(&[classes.clone()], Reference::Sigma).map_err(s)?;
    let gap = seq.log_mgf(n, n as f64 * t).map_err(s)? - classes.psi(t);
    ensure(gap.abs() <= 1e-10, || format!("log-MGF differs from pinched psi by {gap:.3e}"))
}

const CHECKS: &[(&str, &str, Check)] = &[
    ("operator", "positive_part_monotone", positive_part_monotone),
    ("operator", "pinching_contracts_positive_part", pinching_contracts_positive_part),
    ("operator", "powers_add_on_support", powers_add),
    ("operator", "pinched_power_commutes", pinched_power_commutes),
    ("renyi", "data_processing", data_processing),
    ("renyi", "monotone_in_order", monotone_in_order),
    ("renyi", "sandwiched_below_plain", sandwiched_below_plain),
    ("renyi", "additive_on_powers", additive_on_powers),
    ("hoeffding", "polar_shape", polar_shape),
    ("hoeffding", "hoeffding_shape", hoeffding_shape),
    ("hoeffding", "optimizing_form", optimizing_form),
    ("families", "onsite_gibbs_factorizes", onsite_gibbs_factorizes),
    ("families", "markov_psi_at_one", markov_psi_one),
    ("families", "constant_symbols_binary", constant_symbols_binary),
    ("testing", "np_bounds", np_bounds),
    ("testing", "beta_monotone", beta_monotone),
    ("ldp", "log_mgf_convex", log_mgf_convexity),
    ("ldp", "chernoff_dominates_exact_tail", chernoff_dominates),
    ("ldp", "legendre_duality", legendre_duality),
    ("ldp", "pinched_log_mgf", pinched_log_mgf),
];

/// Runs every check on `cases` instances; instance `i` of check `k` uses
/// the stream seeded by `seed + 1000 k + i`.
pub fn run_suite(seed: u64, cases: usize) -> VerifyReport {
    let checks: Vec<CheckResult> = CHECKS
        .par_iter()
        .enumerate()
        .map(|(k, &(module, name, check))| {
            let mut detail = None;
            for i in 0..cases {
                let mut rng = seeded(seed.wrapping_add(1000 * k as u64 + i as u64));
                let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&mut rng)))
                    .unwrap_or_else(|_| Err("panicked".into()));
                if let Err(e) = outcome {
                    detail = Some(format!("case {i}: {e}"));
                    break;
                }
            }
            CheckResult { module, name, cases, passed: detail.is_none(), detail }
        })
        .collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    VerifyReport { seed, passed, failed_count: checks.len() - passed, checks }
}
