//! Neyman–Pearson tests, their error pairs and strong-converse reports.
//!
//! Commuting situations (classical families, pinched pairs) are reduced to
//! a list of likelihood classes `(log ρ(x), log σ(x), log multiplicity)` so
//! that tails at large `n` are summed exactly in log space. Non-commuting
//! pairs go through explicit spectral projections.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};
use crate::families::{family_rate, family_states, Family, StateFamilySpec};
use crate::hoeffding::{hoeffding_anti, polar, ConvexRate, Regime};
use crate::numeric::{fit_line, log_sum_exp};
use crate::operator::{
    pinch, pinched_blocks, positive_part_trace, hermitian_eigenvalues, HermitianOperator, StatePair, Test, C64,
    CLUSTER_TOL,
};
use crate::Extended;

/// Eigenvalues of `ρ − e^{Na}σ` this close to zero (relative to the norm)
/// are left out of the strict positive projection.
pub const TIE_TOL: f64 = 1e-12;
/// Fits with a coefficient of determination below this are flagged.
pub const ASYMPTOTIC_R2: f64 = 0.98;
/// Largest number of likelihood classes built for one block size.
pub const CLASS_CAP: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    Np,
    Pinched,
}

impl TestMode {
    pub fn name(self) -> &'static str {
        match self {
            TestMode::Np => "np",
            TestMode::Pinched => "pinched",
        }
    }
}

/// Type I / type II errors of a test at block size `n`.
///
/// The logarithmic fields stay finite when the errors underflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub n: usize,
    pub a: f64,
    /// `Tr ρ_n (I − T)`.
    pub alpha_err: f64,
    /// `Tr σ_n T`.
    pub beta_err: f64,
    /// `Tr ρ_n T`.
    pub success: f64,
    pub ln_success: f64,
    pub ln_beta: f64,
    /// `log Tr(ρ_n − e^{Na} σ_n)₊` when the test is a Neyman–Pearson projection.
    pub ln_positive_part: Option<f64>,
}

fn clamp_unit(x: f64) -> f64 {
    if x < 0.0 && x > -1e-10 {
        0.0
    } else if x > 1.0 && x < 1.0 + 1e-10 {
        1.0
    } else {
        x
    }
}

impl ErrorPair {
    fn from_logs(n: usize, a: f64, ln_success: f64, ln_fail: f64, ln_beta: f64, ln_pos: Option<f64>) -> Self {
        ErrorPair {
            n,
            a,
            alpha_err: clamp_unit(ln_fail.exp()),
            beta_err: clamp_unit(ln_beta.exp()),
            success: clamp_unit(ln_success.exp()),
            ln_success,
            ln_beta,
            ln_positive_part: ln_pos,
        }
    }

    /// Multiplies the test by `e^{−shift}`.
    pub fn scaled(&self, shift: f64) -> ErrorPair {
        let ln_success = self.ln_success - shift;
        ErrorPair {
            alpha_err: clamp_unit(1.0 - ln_success.exp()),
            beta_err: (self.ln_beta - shift).exp(),
            success: ln_success.exp(),
            ln_success,
            ln_beta: self.ln_beta - shift,
            ln_positive_part: None,
            ..*self
        }
    }
}

/// Spectral projection onto the strictly positive part of
/// `ρ − e^{threshold} σ`, where `threshold = N·a`.
pub fn np_test(pair: &StatePair, n_scaled_a: f64) -> Result<Test> {
    np_projection(pair.rho(), pair.sigma(), n_scaled_a).map(|(t, _)| t)
}

fn np_projection(rho: &HermitianOperator, sigma: &HermitianOperator, threshold: f64) -> Result<(Test, HermitianOperator)> {
    let x = rho.sub_scaled(threshold.exp(), sigma)?;
    let sp = x.spectrum();
    let tol = TIE_TOL * x.norm().max(1.0);
    let keep: Vec<usize> = (0..x.dim()).filter(|&i| sp.values[i] > tol).collect();
    let d = x.dim();
    let mut p = DMatrix::<C64>::zeros(d, d);
    for &k in &keep {
        let v = sp.vectors.column(k);
        p += &v * v.adjoint();
    }
    let p = (&p + p.adjoint()) * C64::new(0.5, 0.0);
    Ok((Test::from_projection(HermitianOperator::new(p)?), x))
}

/// Neyman–Pearson test of the pinched pair `(E_σ(ρ), σ)`.
pub fn pinched_np_test(pair: &StatePair, n_scaled_a: f64, cluster_tol: f64) -> Result<Test> {
    let hat = pinch(pair.rho(), pair.sigma(), cluster_tol)?;
    np_projection(&hat, pair.sigma(), n_scaled_a).map(|(t, _)| t)
}

/// `e^{−N(r − a − φ(a))} T`.
pub fn scaled_test(t: &Test, n_scaled: f64, r: f64, a: f64, phi_a: f64) -> Result<Test> {
    let gap = r - a - phi_a;
    if gap < -1e-12 {
        return Err(domain(format!(
            "not in the linear-tail regime: r = {r} < a + phi(a) = {}",
            a + phi_a
        )));
    }
    let factor = (-n_scaled * gap.max(0.0)).exp();
    Test::new(t.op().scale(factor))
}

/// The three traces of a test, clamped to `[0, 1]` within `1e-10`.
pub fn error_pair(pair: &StatePair, t: &Test, n: usize, a: f64) -> ErrorPair {
    let tr = |x: &HermitianOperator| crate::operator::trace_product(x.matrix(), t.op().matrix()).re;
    let success = tr(pair.rho());
    let beta = tr(pair.sigma());
    ErrorPair {
        n,
        a,
        alpha_err: clamp_unit(1.0 - success),
        beta_err: clamp_unit(beta.max(0.0)),
        success: clamp_unit(success),
        ln_success: success.max(0.0).ln(),
        ln_beta: beta.max(0.0).ln(),
        ln_positive_part: None,
    }
}

/// One group of outcomes sharing `ρ(x)` and `σ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodClass {
    pub ln_rho: f64,
    pub ln_sigma: f64,
    pub ln_mult: f64,
}

/// A commuting pair as a multiset of likelihood classes.
#[derive(Debug, Clone)]
pub struct ClassicalPair {
    pub n: usize,
    pub classes: Vec<LikelihoodClass>,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

impl ClassicalPair {
    /// Type classes of `p^{⊗n}` against `q^{⊗n}`.
    pub fn iid(p: &[f64], q: &[f64], n: usize) -> Result<Self> {
        if p.len() != q.len() {
            return Err(validation("distributions differ in length"));
        }
        let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0 || q[i] > 0.0).collect();
        let lf = ln_factorials(n);
        let mut classes = Vec::new();
        let mut counts = vec![0usize; support.len()];
        fn rec(
            pos: usize,
            left: usize,
            counts: &mut Vec<usize>,
            support: &[usize],
            p: &[f64],
            q: &[f64],
            lf: &[f64],
            out: &mut Vec<LikelihoodClass>,
        ) -> Result<()> {
            if pos + 1 == counts.len() {
                counts[pos] = left;
                let mut c = LikelihoodClass { ln_rho: 0.0, ln_sigma: 0.0, ln_mult: lf[lf.len() - 1] };
                for (k, &i) in support.iter().enumerate() {
                    let m = counts[k] as f64;
                    if counts[k] > 0 {
                        c.ln_rho += m * p[i].ln();
                        c.ln_sigma += m * q[i].ln();
                    }
                    c.ln_mult -= lf[counts[k]];
                }
                out.push(c);
                if out.len() > CLASS_CAP {
                    return Err(Error::Resource { required: out.len(), cap: CLASS_CAP });
                }
                return Ok(());
            }
            for k in 0..=left {
                counts[pos] = k;
                rec(pos + 1, left - k, counts, support, p, q, lf, out)?;
            }
            Ok(())
        }
        if support.is_empty() {
            return Err(validation("empty support"));
        }
        rec(0, n, &mut counts, &support, p, q, &lf, &mut classes)?;
        Ok(ClassicalPair { n, classes })
    }

    /// Path classes of a Markov pair, merging paths with equal likelihoods.
    pub fn markov(payload: &crate::families::MarkovPayload, n: usize) -> Result<Self> {
        payload.validate()?;
        let d = payload.states;
        let quant = |x: f64| (x * 1e9).round() as i64;
        type Key = (usize, i64, i64);
        let mut layer: HashMap<Key, (f64, f64, f64)> = HashMap::new();
        let lnz = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
        for i in 0..d {
            let (lr, ls) = (lnz(payload.pi0[i]), lnz(payload.pi1[i]));
            if lr == f64::NEG_INFINITY && ls == f64::NEG_INFINITY {
                continue;
            }
            layer.insert((i, quant(lr.max(-1e12)), quant(ls.max(-1e12))), (lr, ls, 0.0));
        }
        for _ in 1..n {
            let mut next: HashMap<Key, (f64, f64, f64)> = HashMap::with_capacity(layer.len() * 2);
            for (&(i, _, _), &(lr, ls, lm)) in &layer {
                for j in 0..d {
                    let (p, q) = (payload.p0[i][j], payload.p1[i][j]);
                    if p == 0.0 && q == 0.0 {
                        continue;
                    }
                    let (nr, ns) = (lr + lnz(p), ls + lnz(q));
                    let key = (j, quant(nr.max(-1e12)), quant(ns.max(-1e12)));
                    next.entry(key)
                        .and_modify(|e| e.2 = crate::numeric::log_add(e.2, lm))
                        .or_insert((nr, ns, lm));
                }
            }
            if next.len() > CLASS_CAP {
                return Err(Error::Resource { required: next.len(), cap: CLASS_CAP });
            }
            layer = next;
        }
        let mut classes: Vec<LikelihoodClass> = layer
            .into_values()
            .map(|(ln_rho, ln_sigma, ln_mult)| LikelihoodClass { ln_rho, ln_sigma, ln_mult })
            .collect();
        sort_classes(&mut classes);
        Ok(ClassicalPair { n, classes })
    }

    /// Eigenvalue classes of the pinched pair `(E_{σ^{⊗n}}(ρ^{⊗n}), σ^{⊗n})`
    /// built block by block without forming `ρ^{⊗n}`.
    pub fn pinched_iid(rho: &HermitianOperator, sigma: &HermitianOperator, n: usize, dim_cap: usize) -> Result<(Self, usize)> {
        let d = rho.dim();
        let total = d
            .checked_pow(n as u32)
            .filter(|&t| t <= dim_cap)
            .ok_or(Error::Resource { required: d.saturating_pow(n as u32), cap: dim_cap })?;
        let sp = sigma.spectrum();
        let rotated = sp.vectors.adjoint() * rho.matrix() * &sp.vectors;
        let base_clusters = sigma.clusters(CLUSTER_TOL);
        let mut cluster_of = vec![0usize; d];
        for (c, idx) in base_clusters.iter().enumerate() {
            for &i in idx {
                cluster_of[i] = c;
            }
        }
        // Group strings by the multiset of base clusters they visit.
        let mut groups: HashMap<Vec<u16>, (f64, Vec<Vec<u8>>)> = HashMap::new();
        for idx in 0..total {
            let mut s = vec![0u8; n];
            let mut rest = idx;
            for k in (0..n).rev() {
                s[k] = (rest % d) as u8;
                rest /= d;
            }
            let mut counts = vec![0u16; base_clusters.len()];
            let mut ln_s = 0.0;
            for &x in &s {
                counts[cluster_of[x as usize]] += 1;
                ln_s += sp.values[x as usize].max(0.0).ln();
            }
            groups.entry(counts).or_insert((ln_s, Vec::new())).1.push(s);
        }
        // Merge label groups whose σ values coincide.
        let mut list: Vec<(f64, Vec<Vec<u8>>)> = groups.into_values().collect();
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1[0].cmp(&b.1[0])));
        let mut merged: Vec<(f64, Vec<Vec<u8>>)> = Vec::new();
        for (ln_s, strings) in list {
            match merged.last_mut() {
                Some(last) if (ln_s - last.0).abs() <= CLUSTER_TOL => last.1.extend(strings),
                _ => merged.push((ln_s, strings)),
            }
        }
        let v = merged.len();
        let blocks: Vec<Vec<LikelihoodClass>> = merged
            .par_iter()
            .map(|(ln_s, strings)| {
                let m = strings.len();
                let block = DMatrix::from_fn(m, m, |a, b| {
                    let mut z = C64::new(1.0, 0.0);
                    for (x, y) in strings[a].iter().zip(&strings[b]) {
                        z *= rotated[(*x as usize, *y as usize)];
                    }
                    z
                });
                let block = (&block + block.adjoint()) * C64::new(0.5, 0.0);
                hermitian_eigenvalues(&block)
                    .into_iter()
                    .filter(|&mu| mu > 0.0)
                    .map(|mu| LikelihoodClass { ln_rho: mu.ln(), ln_sigma: *ln_s, ln_mult: 0.0 })
                    .collect()
            })
            .collect();
        let mut classes: Vec<LikelihoodClass> = blocks.into_iter().flatten().collect();
        sort_classes(&mut classes);
        Ok((ClassicalPair { n, classes }, v))
    }

    /// Eigenvalue classes of `(E_σ(ρ), σ)` for an explicit pair.
    pub fn pinched(pair: &StatePair, n: usize) -> Result<(Self, usize)> {
        let blocks = pinched_blocks(pair.rho(), pair.sigma(), CLUSTER_TOL)?;
        let v = blocks.len();
        let mut classes = Vec::new();
        for b in blocks {
            if b.sigma_value <= 0.0 {
                continue;
            }
            let h = (&b.block + b.block.adjoint()) * C64::new(0.5, 0.0);
            for mu in hermitian_eigenvalues(&h) {
                if mu > 0.0 {
                    classes.push(LikelihoodClass { ln_rho: mu.ln(), ln_sigma: b.sigma_value.ln(), ln_mult: 0.0 });
                }
            }
        }
        sort_classes(&mut classes);
        Ok((ClassicalPair { n, classes }, v))
    }

    /// Diagonal pair.
    pub fn diagonal(rho: &[f64], sigma: &[f64], n: usize) -> Self {
        let lnz = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
        let mut classes: Vec<LikelihoodClass> = rho
            .iter()
            .zip(sigma)
            .filter(|(r, s)| **r > 0.0 || **s > 0.0)
            .map(|(r, s)| LikelihoodClass { ln_rho: lnz(*r), ln_sigma: lnz(*s), ln_mult: 0.0 })
            .collect();
        sort_classes(&mut classes);
        ClassicalPair { n, classes }
    }

    /// Errors of the test `{ρ > e^{threshold} σ}` with `threshold = N·a`.
    pub fn np_errors(&self, threshold: f64, a: f64) -> ErrorPair {
        let mut succ = Vec::new();
        let mut fail = Vec::new();
        let mut beta = Vec::new();
        let mut pos_rho = Vec::new();
        for c in &self.classes {
            let llr = c.ln_rho - c.ln_sigma;
            let accept = llr - threshold > TIE_TOL * (1.0 + threshold.abs());
            if accept {
                succ.push(c.ln_mult + c.ln_rho);
                beta.push(c.ln_mult + c.ln_sigma);
                // ρ − e^{T}σ = ρ(1 − e^{T − llr}).
                pos_rho.push(c.ln_mult + c.ln_rho + (-(threshold - llr).exp()).ln_1p());
            } else {
                fail.push(c.ln_mult + c.ln_rho);
            }
        }
        let ln_success = log_sum_exp(succ);
        let ln_pos = log_sum_exp(pos_rho);
        ErrorPair::from_logs(self.n, a, ln_success, log_sum_exp(fail), log_sum_exp(beta), Some(ln_pos))
    }

    /// `log Σ ρ^t σ^{1−t}` over the classes.
    pub fn psi(&self, t: f64) -> f64 {
        log_sum_exp(self.classes.iter().filter(|c| c.ln_rho > f64::NEG_INFINITY && c.ln_sigma > f64::NEG_INFINITY).map(|c| {
            c.ln_mult + t * c.ln_rho + (1.0 - t) * c.ln_sigma
        }))
    }
}

fn sort_classes(classes: &mut [LikelihoodClass]) {
    classes.sort_by(|a, b| {
        (a.ln_rho - a.ln_sigma)
            .total_cmp(&(b.ln_rho - b.ln_sigma))
            .then(a.ln_rho.total_cmp(&b.ln_rho))
            .then(a.ln_mult.total_cmp(&b.ln_mult))
    });
}

/// Least-squares slope of `log error` against `N = n^scaling`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub residual: f64,
    /// False when `r2 < 0.98` ("not yet asymptotic").
    pub asymptotic: bool,
}

/// Fits on the last half of the points (at least two).
pub fn fit_rate(ns_scaled: &[f64], logs: &[f64]) -> Option<RateFit> {
    let k = ns_scaled.len();
    if k < 2 {
        return None;
    }
    let start = (k / 2).min(k - 2);
    let (x, y): (Vec<f64>, Vec<f64>) = ns_scaled[start..]
        .iter()
        .zip(&logs[start..])
        .filter(|(_, y)| y.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    let f = fit_line(&x, &y)?;
    Some(RateFit { slope: f.slope, intercept: f.intercept, r2: f.r2, residual: f.residual, asymptotic: f.r2 >= ASYMPTOTIC_R2 })
}

/// Per-`n` errors together with fitted and predicted exponents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentReport {
    pub family: String,
    pub mode: TestMode,
    /// `"a"` for threshold sweeps, `"r"` for strong-converse reports.
    pub parameter: String,
    pub value: f64,
    pub scaling_exponent: u32,
    /// Threshold actually used for the tests.
    pub a_used: f64,
    pub per_n: Vec<ErrorPair>,
    pub fitted_success_rate: Option<RateFit>,
    pub fitted_beta_rate: Option<RateFit>,
    pub predicted_phi: Option<f64>,
    pub predicted_h: Option<f64>,
    pub regime: Option<Regime>,
    /// Extra factor `r − a − φ(a)` applied through scaled tests.
    pub test_scaling: f64,
    /// Which computation produced the predictions.
    pub provenance: String,
    /// Set when only the bracket `H*_r <= sc <= Ĥ*_r` is known.
    pub bracket_only: bool,
}

impl ExponentReport {
    fn fit(&mut self) {
        let x: Vec<f64> = self.per_n.iter().map(|e| (e.n as f64).powi(self.scaling_exponent as i32)).collect();
        let ls: Vec<f64> = self.per_n.iter().map(|e| e.ln_success).collect();
        let lb: Vec<f64> = self.per_n.iter().map(|e| e.ln_beta).collect();
        self.fitted_success_rate = fit_rate(&x, &ls);
        self.fitted_beta_rate = fit_rate(&x, &lb);
    }
}

/// Route-independent evaluation of NP or pinched NP errors for one family
/// at one block size, for several thresholds at once.
pub struct BlockEvaluator {
    n: usize,
    scaled_n: f64,
    route: Route,
}

enum Route {
    Classes(ClassicalPair),
    Matrices(StatePair),
}

impl BlockEvaluator {
    pub fn new(spec: &StateFamilySpec, n: usize, mode: TestMode, dim_cap: usize) -> Result<Self> {
        let scaled_n = spec.scaled(n);
        let route = match (&spec.family, mode) {
            (Family::Iid(p), _) if spec.is_classical() => {
                let diag = |op: &HermitianOperator| (0..op.dim()).map(|i| op.matrix()[(i, i)].re).collect::<Vec<f64>>();
                Route::Classes(ClassicalPair::iid(&diag(&p.rho), &diag(&p.sigma), n)?)
            }
            (Family::Markov(p), _) => Route::Classes(ClassicalPair::markov(p, n)?),
            (Family::Iid(p), TestMode::Pinched) => Route::Classes(ClassicalPair::pinched_iid(&p.rho, &p.sigma, n, dim_cap)?.0),
            (_, TestMode::Pinched) => Route::Classes(ClassicalPair::pinched(&family_states(spec, n, dim_cap)?, n)?.0),
            (_, TestMode::Np) => Route::Matrices(family_states(spec, n, dim_cap)?),
        };
        Ok(BlockEvaluator { n, scaled_n, route })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Classes of the commuting route, if that route is used.
    pub fn classes(&self) -> Option<&ClassicalPair> {
        match &self.route {
            Route::Classes(c) => Some(c),
            Route::Matrices(_) => None,
        }
    }

    pub fn errors(&self, a: f64) -> Result<ErrorPair> {
        let threshold = self.scaled_n * a;
        match &self.route {
            Route::Classes(c) => Ok(c.np_errors(threshold, a)),
            Route::Matrices(pair) => {
                let (t, x) = np_projection(pair.rho(), pair.sigma(), threshold)?;
                let mut e = error_pair(pair, &t, self.n, a);
                e.ln_positive_part = Some(positive_part_trace(&x).ln());
                Ok(e)
            }
        }
    }
}

/// Evaluates `errors(a)` for every `n`, in parallel over `n`.
fn sweep_errors(spec: &StateFamilySpec, a_list: &[f64], n_list: &[usize], mode: TestMode, dim_cap: usize) -> Result<Vec<Vec<ErrorPair>>> {
    check_n_list(n_list)?;
    let per_n: Vec<Vec<ErrorPair>> = n_list
        .par_iter()
        .map(|&n| {
            let ev = BlockEvaluator::new(spec, n, mode, dim_cap)?;
            a_list.iter().map(|&a| ev.errors(a)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    // Transpose to per-a.
    Ok((0..a_list.len()).map(|i| per_n.iter().map(|row| row[i]).collect()).collect())
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(validation("n_list is empty"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(validation("n_list must be positive and strictly increasing"));
    }
    Ok(())
}

/// Block sizes used to extrapolate sampled rate curves.
pub fn rate_sample_sizes(spec: &StateFamilySpec, dim_cap: usize) -> Vec<usize> {
    match &spec.family {
        Family::Gibbs(g) => {
            let d = g.rho.site_dim.max(2);
            let mut max_n: usize = 1;
            while d.pow(max_n as u32 + 1) <= dim_cap.min(256) {
                max_n += 1;
            }
            (max_n.saturating_sub(3).max(1)..=max_n).collect()
        }
        _ => vec![],
    }
}

fn provenance_of(spec: &StateFamilySpec) -> String {
    match spec.family {
        Family::Iid(_) => "hoeffding on exact single-copy psi*",
        Family::Markov(_) => "hoeffding on Perron-root psi",
        Family::Quasifree(_) => "hoeffding on Szego psi",
        Family::Gibbs(_) => "hoeffding on extrapolated psi*_n",
    }
    .to_string()
}

/// Quasi-free pairs whose alternative symbol is not constant only have the
/// two-sided bracket.
fn bracket_only(spec: &StateFamilySpec) -> bool {
    match &spec.family {
        Family::Quasifree(q) => match &q.r_symbol {
            crate::families::Symbol::Trig(t) => t.cos_coeffs.iter().chain(&t.sin_coeffs).any(|c| *c != 0.0),
            crate::families::Symbol::Custom(_) => true,
        },
        _ => false,
    }
}

/// Default threshold grid: 9 points spanning `(a_min + ε, a_max − ε)` with
/// `ε` two percent of the gap.
pub fn default_a_grid(f: &ConvexRate) -> Result<Vec<f64>> {
    let lo = f.a_min();
    let hi = f
        .a_max()
        .finite()
        .ok_or_else(|| validation("a_max is infinite; supply an explicit a-grid"))?;
    let eps = 0.02 * (hi - lo);
    Ok((0..9).map(|k| lo + eps + (hi - lo - 2.0 * eps) * k as f64 / 8.0).collect())
}

/// NP or pinched-NP sweep at threshold `a`, compared against `φ(a)` and
/// `φ(a) + a`.
pub fn exponent_sweep(spec: &StateFamilySpec, a: f64, n_list: &[usize], mode: TestMode, dim_cap: usize) -> Result<ExponentReport> {
    let f = family_rate(spec, &rate_sample_sizes(spec, dim_cap), dim_cap)?;
    let mut out = exponent_sweep_grid(spec, &f, &[a], n_list, mode, dim_cap)?;
    Ok(out.remove(0))
}

/// Sweeps several thresholds against a known rate curve, sharing the
/// per-`n` work.
pub fn exponent_sweep_grid(
    spec: &StateFamilySpec,
    f: &ConvexRate,
    a_list: &[f64],
    n_list: &[usize],
    mode: TestMode,
    dim_cap: usize,
) -> Result<Vec<ExponentReport>> {
    let errs = sweep_errors(spec, a_list, n_list, mode, dim_cap)?;
    Ok(a_list
        .iter()
        .zip(errs)
        .map(|(&a, per_n)| {
            let phi = polar(f, a).finite();
            let mut rep = ExponentReport {
                family: spec.kind().to_string(),
                mode,
                parameter: "a".into(),
                value: a,
                scaling_exponent: spec.scaling_exponent,
                a_used: a,
                per_n,
                fitted_success_rate: None,
                fitted_beta_rate: None,
                predicted_phi: phi,
                predicted_h: None,
                regime: None,
                test_scaling: 0.0,
                provenance: provenance_of(spec),
                bracket_only: bracket_only(spec),
            };
            rep.fit();
            rep
        })
        .collect())
}

/// Fraction of the gap `a_max − a_min` kept between the scaled-test
/// threshold and `a_max` in the linear-tail regime.
pub const LINEAR_TAIL_BACKOFF: f64 = 0.02;

/// Strong-converse report at rate `r`.
///
/// The regime of `H*_r` selects the tests: NP tests at `a = r` in the zero
/// regime, at `a = a_r` in the interior, and scaled tests
/// `e^{−N(r−a−φ(a))} S_n(a)` with `a` just below `a_max` in the linear tail.
pub fn sc_report(spec: &StateFamilySpec, r: f64, n_list: &[usize], mode: TestMode, dim_cap: usize) -> Result<ExponentReport> {
    let f = family_rate(spec, &rate_sample_sizes(spec, dim_cap), dim_cap)?;
    sc_report_with_rate(spec, &f, r, n_list, mode, dim_cap)
}

pub fn sc_report_with_rate(
    spec: &StateFamilySpec,
    f: &ConvexRate,
    r: f64,
    n_list: &[usize],
    mode: TestMode,
    dim_cap: usize,
) -> Result<ExponentReport> {
    let h = hoeffding_anti(f, r)?;
    let (a, shift) = match h.regime {
        Regime::Zero => (r, 0.0),
        Regime::Interior => (h.a_r.expect("interior regime has a_r"), 0.0),
        Regime::LinearTail => {
            let a_max = f.a_max().expect_finite("a_max in linear tail");
            let a = a_max - LINEAR_TAIL_BACKOFF * (a_max - f.a_min());
            let phi = polar(f, a).expect_finite("polar transform below a_max");
            (a, r - a - phi)
        }
    };
    let errs = sweep_errors(spec, &[a], n_list, mode, dim_cap)?.remove(0);
    let per_n: Vec<ErrorPair> = errs
        .into_iter()
        .map(|e| if shift > 0.0 { e.scaled(shift * spec.scaled(e.n)) } else { e })
        .collect();
    let mut rep = ExponentReport {
        family: spec.kind().to_string(),
        mode,
        parameter: "r".into(),
        value: r,
        scaling_exponent: spec.scaling_exponent,
        a_used: a,
        per_n,
        fitted_success_rate: None,
        fitted_beta_rate: None,
        predicted_phi: polar(f, a).finite(),
        predicted_h: Some(h.value),
        regime: Some(h.regime),
        test_scaling: shift,
        provenance: provenance_of(spec),
        bracket_only: bracket_only(spec),
    };
    rep.fit();
    Ok(rep)
}

/// Exact finite-`n` form of the measurement lower bound:
/// `log Tr ρT <= ((α−1)/α)[D*_α(ρ_n‖σ_n) + log Tr σT]` for every `α > 1`.
/// Returns the largest violation over the supplied `(α, ψ*_n(α))` grid
/// (negative when the inequality holds).
pub fn measurement_bound_violation(e: &ErrorPair, psi_star: &[(f64, f64)]) -> f64 {
    psi_star
        .iter()
        .filter(|(a, _)| *a > 1.0)
        .map(|&(alpha, psi)| {
            let d = psi / (alpha - 1.0);
            e.ln_success - (alpha - 1.0) / alpha * (d + e.ln_beta)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Chernoff-type bound on NP tests:
/// `log Tr ρ_n S_n(a) <= −[N a (α−1) − ψ_n(α)]`. Returns the largest
/// violation over the grid.
pub fn np_upper_bound_violation(e: &ErrorPair, n_scaled: f64, psi: &[(f64, f64)]) -> f64 {
    psi.iter()
        .filter(|(a, _)| *a > 1.0)
        .map(|&(alpha, p)| e.ln_success + (n_scaled * e.a * (alpha - 1.0) - p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The asymptotic form of the measurement bound applied to a fitted report:
/// the success rate cannot beat `−H*_{r'}` where `r' = −(fitted β rate)`.
/// Returns `(success_rate, −H*_{r'}, tolerance)`.
pub fn lower_bound_check(rep: &ExponentReport, f: &ConvexRate) -> Option<(f64, f64, f64)> {
    let s = rep.fitted_success_rate?;
    let b = rep.fitted_beta_rate?;
    let r_eff = (-b.slope).max(0.0);
    let h = hoeffding_anti(f, r_eff).ok()?.value;
    Some((s.slope, -h, s.residual + b.residual + 0.02))
}

/// `Extended` helper for reports.
pub fn finite_or_nan(x: Extended) -> f64 {
    x.finite().unwrap_or(f64::NAN)
}
