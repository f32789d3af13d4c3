//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use sconv::families::gibbs::{factorization_certificate, factorization_constant, qubit_chain, splits_up_to};
use sconv::families::quasifree::{quasifree_psi_star_singleparticle, quasifree_relent_limit, szego_limit};
use sconv::families::{
    family_rate, fock_density, markov_psi_limit, markov_psi_n, quasifree_block_symbol, Family, GibbsPairPayload,
    IidPayload, MarkovPayload, QuasiFreePayload, StateFamilySpec, Symbol, TrigSymbol,
};
use sconv::hoeffding::{hoeffding_anti, polar, regime_threshold, ConvexRate, Regime};
use sconv::ldp::{
    bernoulli_kl, chernoff_upper, gartner_ellis_lower_check, log_mgf_convex, WeightedSampleSequence,
};
use sconv::operator::{distinct_eigenvalue_count, tensor_power, CLUSTER_TOL, DEFAULT_DIM_CAP};
use sconv::renyi::{classical_renyi, PairSpectra, RenyiVariant};
use sconv::sample::{random_density, random_test_op, seeded};
use sconv::testing::{
    exponent_sweep_grid, lower_bound_check, measurement_bound_violation, sc_report_with_rate, ClassicalPair,
    TestMode,
};
use sconv::{Extended, HermitianOperator, StatePair};

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fmax(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn additivity() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_density(3, &mut rng);
        let sigma = random_density(3, &mut rng);
        let single = PairSpectra::new(&rho, &sigma).map_err(err)?;
        for k in 2..=4 {
            let rk = tensor_power(&rho, k, DEFAULT_DIM_CAP).map_err(err)?;
            let sk = tensor_power(&sigma, k, DEFAULT_DIM_CAP).map_err(err)?;
            let multi = PairSpectra::new(&rk, &sk).map_err(err)?;
            for alpha in [0.6, 1.5, 3.0] {
                for v in RenyiVariant::BOTH {
                    let dev = (multi.psi(alpha, v).map_err(err)? - k as f64 * single.psi(alpha, v).map_err(err)?).abs();
                    worst = worst.max(dev);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-8 && secs < 10.0, format!("max deviation {worst:.2e}, {secs:.2}s"))
}

fn derivatives() -> Outcome {
    let mut rng = seeded(202);
    let h = 1e-5;
    let (mut worst_rel, mut worst_d1): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let ps = PairSpectra::new(&rho, &sigma).map_err(err)?;
        let d1 = ps.relative_entropy().expect_finite("relative entropy");
        for v in RenyiVariant::BOTH {
            for t in [0.7, 1.0, 1.8, 4.0] {
                let exact = ps.psi_derivative(t, v).map_err(err)?;
                let fd = (ps.psi(t + h, v).map_err(err)? - ps.psi(t - h, v).map_err(err)?) / (2.0 * h);
                worst_rel = worst_rel.max((exact - fd).abs() / exact.abs().max(1e-300));
                if t == 1.0 {
                    worst_d1 = worst_d1.max((exact - d1).abs()).max((fd - d1).abs());
                }
            }
        }
    }
    verdict(
        worst_rel <= 1e-6 && worst_d1 <= 1e-8,
        format!("max relative FD error {worst_rel:.2e}, max |ψ'(1) − D| {worst_d1:.2e}"),
    )
}

fn pinching_sandwich() -> Outcome {
    let mut rng = seeded(303);
    let (mut worst_slack, mut v_ok) = (f64::NEG_INFINITY, true);
    for _ in 0..10 {
        let rho = random_density(2, &mut rng);
        let sigma = random_density(2, &mut rng);
        let single = PairSpectra::new(&rho, &sigma).map_err(err)?;
        for n in 1..=8 {
            let sn = tensor_power(&sigma, n, DEFAULT_DIM_CAP).map_err(err)?;
            let v_sym = distinct_eigenvalue_count(&sn, CLUSTER_TOL);
            let (pinched, v_blocks) = ClassicalPair::pinched_iid(&rho, &sigma, n, DEFAULT_DIM_CAP).map_err(err)?;
            v_ok &= v_sym == n + 1 && v_blocks == n + 1;
            for alpha in [1.5, 2.0, 3.0] {
                let star = n as f64 * single.psi(alpha, RenyiVariant::Sandwiched).map_err(err)?;
                let hat = pinched.psi(alpha);
                let lower = star - alpha * ((n + 1) as f64).ln();
                worst_slack = worst_slack.max(lower - hat).max(hat - star);
            }
        }
    }
    verdict(
        worst_slack <= 1e-9 && v_ok,
        format!("largest violation {worst_slack:.2e}, v(σ^⊗n) = n+1: {v_ok}"),
    )
}

fn legendre_machinery() -> Outcome {
    let quad = ConvexRate::quadratic(1.0).map_err(err)?;
    let h = hoeffding_anti(&quad, 3.0).map_err(err)?;
    let quad_ok = (h.value - 1.0).abs() <= 1e-10 && (h.a_r.unwrap_or(f64::NAN) - 2.0).abs() <= 1e-10;

    let a0 = 0.4;
    let lin = ConvexRate::linear(a0).map_err(err)?;
    let lin_ok = [0.5, 1.0, 2.5].iter().all(|&r| {
        hoeffding_anti(&lin, r).map(|h| h.regime == Regime::LinearTail && h.value == r - a0).unwrap_or(false)
    });

    // Boundary continuity on a curve with both an interior and a linear tail.
    let pair = StatePair::new(HermitianOperator::diagonal(&[0.5, 0.5]), HermitianOperator::diagonal(&[0.25, 0.75]))
        .map_err(err)?;
    let f = ConvexRate::from_pair(&pair, RenyiVariant::Sandwiched).map_err(err)?;
    let th = regime_threshold(&f).expect_finite("threshold");
    let eps = 1e-10;
    let (below, above) = (hoeffding_anti(&f, th - eps).map_err(err)?, hoeffding_anti(&f, th + eps).map_err(err)?);
    let jump = (above.value - below.value).abs();
    let (zb, za) = (hoeffding_anti(&f, f.a_min() - eps).map_err(err)?, hoeffding_anti(&f, f.a_min() + 1e-8).map_err(err)?);
    let jump0 = (za.value - zb.value).abs();

    // H*_r = 0 exactly when r <= ∂⁺f(1).
    let mut zero_ok = true;
    for (curve, d1) in [(&quad, 0.0), (&lin, a0), (&f, f.right_derivative_at_1())] {
        for k in 0..40 {
            let r = k as f64 * 0.05;
            let v = hoeffding_anti(curve, r).map_err(err)?.value;
            let expect_zero = r <= d1 + 1e-9;
            zero_ok &= if expect_zero { v == 0.0 } else { v > 0.0 };
        }
    }
    verdict(
        quad_ok && lin_ok && jump <= 1e-8 && jump0 <= 1e-8 && zero_ok,
        format!(
            "quadratic H={:.12} a_r={:.12}; linear tail exact: {lin_ok}; boundary jumps {jump:.1e}/{jump0:.1e}; zero iff r<=f'(1): {zero_ok}",
            h.value,
            h.a_r.unwrap_or(f64::NAN)
        ),
    )
}

fn binary_iid() -> StateFamilySpec {
    StateFamilySpec::new(Family::Iid(IidPayload {
        rho: HermitianOperator::diagonal(&[0.5, 0.5]),
        sigma: HermitianOperator::diagonal(&[0.25, 0.75]),
    }))
}

fn classical_convergence() -> Outcome {
    let start = Instant::now();
    let spec = binary_iid();
    let f = family_rate(&spec, &[], DEFAULT_DIM_CAP).map_err(err)?;
    let d1 = f.a_min();
    let dinf = f.a_max().expect_finite("D_max");
    let a = 0.5 * (d1 + dinf);
    let phi = polar(&f, a).expect_finite("φ(a)");
    let ns = [256, 512, 1024, 2048, 4096];
    let rep = exponent_sweep_grid(&spec, &f, &[a], &ns, TestMode::Np, DEFAULT_DIM_CAP).map_err(err)?.remove(0);
    let last = rep.per_n.last().unwrap();
    let n = last.n as f64;
    let pos_rate = -last.ln_positive_part.unwrap() / n;
    let beta_rate = -last.ln_beta / n;
    let xs: Vec<f64> = rep.per_n.iter().map(|e| e.n as f64).collect();
    let pos: Vec<f64> = rep.per_n.iter().map(|e| e.ln_positive_part.unwrap()).collect();
    let fit_pos = sconv::testing::fit_rate(&xs, &pos).ok_or("fit failed")?;
    let fit_beta = rep.fitted_beta_rate.ok_or("fit failed")?;
    let e_pos = (pos_rate - phi).abs().max((-fit_pos.slope - phi).abs());
    let e_beta = (beta_rate - (phi + a)).abs().max((-fit_beta.slope - (phi + a)).abs());
    let secs = start.elapsed().as_secs_f64();
    verdict(
        e_pos <= 0.01 && e_beta <= 0.01 && secs < 30.0,
        format!("a={a:.6} φ(a)={phi:.6}: positive-part rate error {e_pos:.2e}, β-rate error {e_beta:.2e}, {secs:.2}s"),
    )
}

fn quantum_pinched() -> Outcome {
    let theta = PI / 5.0;
    let (c, s) = (theta.cos(), theta.sin());
    let (l0, l1) = (0.85, 0.15);
    let rho = HermitianOperator::from_real_rows(
        2,
        &[l0 * c * c + l1 * s * s, (l0 - l1) * c * s, (l0 - l1) * c * s, l0 * s * s + l1 * c * c],
    )
    .map_err(err)?;
    let sigma = HermitianOperator::diagonal(&[0.3, 0.7]);
    let spec = StateFamilySpec::new(Family::Iid(IidPayload { rho: rho.clone(), sigma: sigma.clone() }));
    let f = family_rate(&spec, &[], DEFAULT_DIM_CAP).map_err(err)?;
    let a = 0.5 * (f.a_min() + f.a_max().expect_finite("D_max"));
    let phi = polar(&f, a).expect_finite("φ(a)");
    let ns: Vec<usize> = (4..=12).collect();
    let rep = exponent_sweep_grid(&spec, &f, &[a], &ns, TestMode::Pinched, DEFAULT_DIM_CAP).map_err(err)?.remove(0);
    let gaps: Vec<(f64, f64)> = rep
        .per_n
        .iter()
        .map(|e| {
            let n = e.n as f64;
            ((e.ln_success / n + phi).abs(), (e.ln_beta / n + phi + a).abs())
        })
        .collect();
    let (g_first, g_last) = (gaps[0], *gaps.last().unwrap());
    // Trend: a line through the gap sequence slopes downward, and the last
    // gap is below the first.
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope_of = |k: usize| {
        let y: Vec<f64> = gaps.iter().map(|g| if k == 0 { g.0 } else { g.1 }).collect();
        sconv::numeric::fit_line(&x, &y).map(|l| l.slope).unwrap_or(f64::NAN)
    };
    let approaching = slope_of(0) < 0.0 && slope_of(1) < 0.0 && g_last.0 < g_first.0 && g_last.1 < g_first.1;
    let final_gap = g_last.0.max(g_last.1);

    // Finite-n measurement bound with the exact ψ*_n = nψ*, and the fitted form.
    let psi_grid: Vec<(f64, f64)> = [1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0]
        .iter()
        .map(|&al| (al, f.eval(al)))
        .collect();
    let exact_violation = fmax(rep.per_n.iter().map(|e| {
        let scaled: Vec<(f64, f64)> = psi_grid.iter().map(|(al, p)| (*al, e.n as f64 * p)).collect();
        measurement_bound_violation(e, &scaled)
    }));
    let (rate, bound, tol) = lower_bound_check(&rep, &f).ok_or("no fit")?;
    let fitted_ok = rate <= bound + tol;
    verdict(
        approaching && final_gap <= 0.1 && exact_violation <= 1e-9 && fitted_ok,
        format!(
            "a={a:.4} φ̂(a)={phi:.4}; gaps n=4 ({:.3}, {:.3}) -> n=12 ({:.3}, {:.3}) against limit 0.1; approaching: {approaching}; finite-n bound violation {exact_violation:.2e}; fitted {rate:.4} <= {bound:.4} + {tol:.3}",
            g_first.0, g_first.1, g_last.0, g_last.1
        ),
    )
}

fn random_trig(rng: &mut impl Rng) -> TrigSymbol {
    let mut coeffs = [0.0; 3];
    for c in coeffs.iter_mut() {
        *c = rng.gen_range(-0.1..0.1);
    }
    TrigSymbol { constant: rng.gen_range(0.4..0.6), cos_coeffs: vec![coeffs[0], coeffs[1]], sin_coeffs: vec![coeffs[2]] }
}

fn quasifree_oracle() -> Outcome {
    let mut rng = seeded(707);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let payload = QuasiFreePayload {
            nu: 1,
            q_symbol: Symbol::Trig(random_trig(&mut rng)),
            r_symbol: Symbol::Trig(random_trig(&mut rng)),
            c_bound: 0.2,
        };
        payload.validate().map_err(err)?;
        for n in 1..=8 {
            let (q, r) = quasifree_block_symbol(&payload, n).map_err(err)?;
            let fock = PairSpectra::new(&fock_density(&q).map_err(err)?, &fock_density(&r).map_err(err)?).map_err(err)?;
            for alpha in [1.5, 2.0, 3.0] {
                let sp = quasifree_psi_star_singleparticle(&payload, n, alpha).map_err(err)?;
                worst = worst.max((sp - fock.psi(alpha, RenyiVariant::Sandwiched).map_err(err)?).abs());
            }
        }
    }
    verdict(worst <= 1e-8, format!("max |single-particle − Fock| {worst:.2e}"))
}

fn szego_payload() -> QuasiFreePayload {
    QuasiFreePayload {
        nu: 1,
        q_symbol: Symbol::Trig(TrigSymbol { constant: 0.5, cos_coeffs: vec![0.2], sin_coeffs: vec![] }),
        r_symbol: Symbol::Trig(TrigSymbol { constant: 0.5, cos_coeffs: vec![0.0, 0.1], sin_coeffs: vec![0.15] }),
        c_bound: 0.2,
    }
}

fn szego_convergence() -> Outcome {
    let payload = szego_payload();
    payload.validate().map_err(err)?;
    let mut detail = Vec::new();
    let mut ok = true;
    for alpha in [1.5, 2.0, 3.0] {
        let limit = szego_limit(&payload, alpha);
        let errs: Vec<f64> = [64usize, 128, 256, 512]
            .iter()
            .map(|&n| quasifree_psi_star_singleparticle(&payload, n, alpha).map(|p| (p / n as f64 - limit).abs()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        ok &= decreasing && errs[3] <= 1e-3;
        detail.push(format!("α={alpha}: n=512 error {:.2e}, decreasing {decreasing}", errs[3]));
    }
    let h = 1e-5;
    let fd = (szego_limit(&payload, 1.0 + h) - szego_limit(&payload, 1.0 - h)) / (2.0 * h);
    let d1 = quasifree_relent_limit(&payload);
    let rel_err = (fd - d1).abs();
    ok &= rel_err <= 1e-6;
    detail.push(format!("relative-entropy limit vs derivative {rel_err:.2e}"));
    verdict(ok, detail.join("; "))
}

fn gibbs_factorization() -> Outcome {
    let cap = DEFAULT_DIM_CAP;
    let onsite = qubit_chain(0.0, 0.7, 0.3, 0.5);
    let mut onsite_ok = true;
    for (m, k, r) in splits_up_to(8) {
        let (u, l) = factorization_certificate(&onsite, m, k, r, 1.0, cap).map_err(err)?;
        onsite_ok &= u && l;
    }
    let chain = qubit_chain(1.0, 0.8, 0.0, 0.5);
    let eta = factorization_constant(&chain, 8, cap).map_err(err)?;
    let mut chain_ok = true;
    for (m, k, r) in splits_up_to(8) {
        let (u, l) = factorization_certificate(&chain, m, k, r, eta, cap).map_err(err)?;
        chain_ok &= u && l;
    }
    // σ is the on-site chain (η = 1), so η is a common constant for the pair.
    let spec = StateFamilySpec::new(Family::Gibbs(GibbsPairPayload { rho: chain, sigma: onsite }));
    let mut bracket_ok = true;
    let mut detail = Vec::new();
    for alpha in [1.5, 2.0] {
        let psi: Vec<f64> = (1..=8)
            .map(|n| {
                sconv::families::family_psi(&spec, n, alpha, RenyiVariant::Sandwiched, cap)
                    .map(|v| v.expect_finite("ψ*_n") / n as f64)
            })
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let width = |n: usize| (2.0 * alpha - 1.0) * eta.ln() / n as f64;
        // Every finite-n interval must contain the limit, so their
        // intersection must be nonempty and contain the extrapolated value.
        let lo = fmax_signed(psi.iter().enumerate().map(|(i, p)| p - width(i + 1)));
        let hi = psi.iter().enumerate().map(|(i, p)| p + width(i + 1)).fold(f64::INFINITY, f64::min);
        let x: Vec<f64> = (5..=8).map(|n| 1.0 / n as f64).collect();
        let y: Vec<f64> = (5..=8).map(|n| psi[n - 1]).collect();
        let limit = sconv::numeric::fit_line(&x, &y).ok_or("fit failed")?.intercept;
        let ok = lo <= hi && lo <= limit && limit <= hi;
        bracket_ok &= ok;
        detail.push(format!("α={alpha}: limit {limit:.6} in [{lo:.6}, {hi:.6}]"));
    }
    verdict(
        onsite_ok && chain_ok && bracket_ok,
        format!("on-site η=1: {onsite_ok}; chain η={eta:.6} certifies: {chain_ok}; {}", detail.join("; ")),
    )
}

fn fmax_signed(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn ldp_lemmas() -> Outcome {
    let ns: Vec<usize> = (4..=16).map(|k| 1usize << k).collect();
    let seq = WeightedSampleSequence::binomial(&ns, 0.5).map_err(err)?;
    let t_grid: Vec<f64> = (0..=64).map(|k| k as f64 * 0.0625).collect();
    let x = 0.7;
    let bound = chernoff_upper(&seq, x, &t_grid).map_err(err)?;
    let slack = seq
        .levels()
        .iter()
        .filter(|l| l.n <= 4096)
        .map(|l| bound - l.upper_tail_rate(x))
        .fold(f64::INFINITY, f64::min);
    let convex = seq
        .levels()
        .iter()
        .all(|l| log_mgf_convex(l, &(-40..=40).map(|k| k as f64 * 0.1).collect::<Vec<_>>()).unwrap_or(false));
    let check = gartner_ellis_lower_check(&seq, x, (0.7, 1.0), (0.0, 2.0)).map_err(err)?;
    let at_4096 = check.per_n.iter().find(|m| m.n == 4096).ok_or("missing n = 4096")?;
    let upto: Vec<_> = check.per_n.iter().filter(|m| m.n <= 4096).cloned().collect();
    let shrink = upto.windows(2).all(|w| w[1].margin.abs() <= w[0].margin.abs());
    let rc = seq.rate_curve();
    let duality = fmax((-20..=20).map(|k| rc.duality_residual(k as f64 * 0.1).map(f64::abs).unwrap_or(f64::INFINITY)));
    let mass = check.per_n.last().unwrap().tilted_mass;
    let kl_err = (check.rate - bernoulli_kl(x, 0.5)).abs();
    verdict(
        slack >= -1e-12 && convex && at_4096.margin.abs() < 0.01 && shrink && duality <= 1e-8 && mass >= 0.99 && kl_err < 1e-12,
        format!(
            "Chernoff slack {slack:.2e}; convex {convex}; margin at 4096 {:.2e}, shrinking {shrink}; duality {duality:.1e}; tilted mass at n={} {mass:.5}",
            at_4096.margin,
            check.per_n.last().unwrap().n
        ),
    )
}

fn markov_chain() -> MarkovPayload {
    MarkovPayload {
        states: 2,
        pi0: vec![0.6, 0.4],
        pi1: vec![0.5, 0.5],
        p0: vec![vec![0.9, 0.1], vec![0.3, 0.7]],
        p1: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
    }
}

fn markov_route() -> Outcome {
    let chain = markov_chain();
    let (rho, sigma) = chain.path_probabilities(2, DEFAULT_DIM_CAP).map_err(err)?;
    let mut enum_err: f64 = 0.0;
    for alpha in [0.5, 1.5, 2.0, 4.0] {
        let direct: f64 = rho.iter().zip(&sigma).map(|(p, q)| p.powf(alpha) * q.powf(1.0 - alpha)).sum::<f64>().ln();
        let tm = markov_psi_n(&chain, alpha, 2).map_err(err)?.expect_finite("ψ_2");
        enum_err = enum_err.max((direct - tm).abs());
    }
    let mut conv: f64 = 0.0;
    for alpha in [1.5, 2.0, 4.0] {
        let limit = markov_psi_limit(&chain, alpha).map_err(err)?.expect_finite("limit");
        let psi = markov_psi_n(&chain, alpha, 2048).map_err(err)?.expect_finite("ψ_n");
        conv = conv.max((psi / 2048.0 - limit).abs());
    }
    let spec = StateFamilySpec::new(Family::Markov(chain));
    let f = family_rate(&spec, &[], DEFAULT_DIM_CAP).map_err(err)?;
    let convex = f.check_invariants().is_ok();
    let d1 = f.right_derivative_at_1();
    let step = 0.01;
    let grid: Vec<f64> = (1..=60).map(|k| k as f64 * step).collect();
    let first_positive = grid
        .iter()
        .copied()
        .find(|&r| hoeffding_anti(&f, r).map(|h| h.regime != Regime::Zero).unwrap_or(false))
        .ok_or("no positive regime")?;
    let located = first_positive > d1 - 1e-12 && first_positive - d1 <= step;
    let ns = [16, 32, 64];
    let below = sc_report_with_rate(&spec, &f, d1 - 2.0 * step, &ns, TestMode::Np, DEFAULT_DIM_CAP).map_err(err)?;
    let above = sc_report_with_rate(&spec, &f, d1 + 0.1, &ns, TestMode::Np, DEFAULT_DIM_CAP).map_err(err)?;
    let reports_ok = below.regime == Some(Regime::Zero)
        && above.regime != Some(Regime::Zero)
        && below.predicted_h == Some(0.0)
        && above.predicted_h.unwrap_or(0.0) > 0.0;
    verdict(
        enum_err <= 1e-14 && conv <= 1e-3 && convex && located && reports_ok,
        format!(
            "n=2 enumeration {enum_err:.1e}; n=2048 gap {conv:.2e}; convexity gates {convex}; D1={d1:.6}, first positive r={first_positive:.2}; sc reports {reports_ok}"
        ),
    )
}

fn data_processing() -> Outcome {
    let mut rng = seeded(1212);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let ps = PairSpectra::new(&rho, &sigma).map_err(err)?;
        let quantum: Vec<f64> = [0.5, 1.5, 4.0, 32.0]
            .iter()
            .map(|&a| ps.divergence(a, RenyiVariant::Sandwiched).map(|v| v.expect_finite("D*")))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for _ in 0..10 {
            let m = random_test_op(d, &mut rng);
            let tr = |x: &HermitianOperator, y: &HermitianOperator| sconv::operator::trace_product(x.matrix(), y.matrix()).re;
            let (pr, ps_) = (tr(&rho, &m), tr(&sigma, &m));
            let p = [pr, 1.0 - pr];
            let q = [ps_, 1.0 - ps_];
            for (i, &a) in [0.5, 1.5, 4.0, 32.0].iter().enumerate() {
                if let Extended::Finite(c) = classical_renyi(&p, &q, a) {
                    worst = worst.max(c - quantum[i]);
                }
            }
        }
    }
    verdict(worst <= 1e-9, format!("largest classical − quantum {worst:.2e} over 1000 measurements"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("additivity of ψ under tensor powers", additivity),
        ("closed-form ψ derivatives", derivatives),
        ("pinching sandwich", pinching_sandwich),
        ("Legendre machinery and regimes", legendre_machinery),
        ("classical strong-converse convergence", classical_convergence),
        ("pinched NP tests on a quantum pair", quantum_pinched),
        ("quasi-free single-particle vs Fock", quasifree_oracle),
        ("Szego convergence", szego_convergence),
        ("Gibbs factorization", gibbs_factorization),
        ("large-deviation lemmas", ldp_lemmas),
        ("Markov route", markov_route),
        ("data processing", data_processing),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.2}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.2}s]", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
