//! Finite-support large deviations: log-moment generating functions,
//! Chernoff upper bounds and Gärtner–Ellis lower-bound checks.
//!
//! A sequence `μ_n` of finite measures is stored per level as atoms
//! `(y, log w)` with a scale `c_n`. All tail sums are done in log space.

use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Result};
use crate::numeric::{bisect_increasing, golden_max, log_sum_exp};
use crate::testing::ClassicalPair;

/// Largest successive-level change of `Λ_n(c_n t)/c_n` accepted as a limit.
pub const CAUCHY_TOL: f64 = 1e-3;
/// Width of the tilted-measure window as a fraction of the lower-bound window.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.05;

/// One measure `μ_n = Σ w_i δ_{y_i}` with its scale `c_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightLevel {
    pub n: usize,
    pub c_n: f64,
    /// `(y, log w)`; zero weights are dropped.
    pub atoms: Vec<(f64, f64)>,
}

impl WeightLevel {
    pub fn new(n: usize, c_n: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if !(c_n > 0.0) {
            return Err(validation("c_n must be positive"));
        }
        if atoms.iter().any(|(y, lw)| !y.is_finite() || lw.is_nan() || *lw == f64::INFINITY) {
            return Err(validation("atoms need finite points and weights"));
        }
        let atoms = atoms.into_iter().filter(|(_, lw)| *lw > f64::NEG_INFINITY).collect();
        Ok(WeightLevel { n, c_n, atoms })
    }

    /// `Λ_n(s) = log Σ w_i e^{s y_i}`.
    pub fn log_mgf(&self, s: f64) -> Result<f64> {
        if self.atoms.is_empty() {
            return Err(domain("empty support"));
        }
        Ok(log_sum_exp(self.atoms.iter().map(|(y, lw)| lw + s * y)))
    }

    /// `Λ_n(c_n t) / c_n`.
    pub fn scaled_log_mgf(&self, t: f64) -> Result<f64> {
        Ok(self.log_mgf(self.c_n * t)? / self.c_n)
    }

    /// Derivative of the scaled log-MGF: the mean of the tilted measure.
    pub fn tilted_mean(&self, t: f64) -> Result<f64> {
        let z = self.log_mgf(self.c_n * t)?;
        Ok(self.atoms.iter().map(|(y, lw)| y * (lw + self.c_n * t * y - z).exp()).sum())
    }

    /// `(1/c_n) log μ_n(A)` for `A = {y : keep(y)}`.
    pub fn log_mass_rate(&self, keep: impl Fn(f64) -> bool) -> f64 {
        log_sum_exp(self.atoms.iter().filter(|(y, _)| keep(*y)).map(|(_, lw)| *lw)) / self.c_n
    }

    /// `(1/c_n) log μ_n([x, ∞))`.
    pub fn upper_tail_rate(&self, x: f64) -> f64 {
        self.log_mass_rate(|y| y >= x)
    }

    /// `(1/c_n) log μ_n((−∞, x])`.
    pub fn lower_tail_rate(&self, x: f64) -> f64 {
        self.log_mass_rate(|y| y <= x)
    }

    /// Mass of the measure tilted by `e^{c_n t y}` (normalized) inside `(lo, hi)`.
    pub fn tilted_mass(&self, t: f64, lo: f64, hi: f64) -> Result<f64> {
        let z = self.log_mgf(self.c_n * t)?;
        Ok(log_sum_exp(self.atoms.iter().filter(|(y, _)| *y > lo && *y < hi).map(|(y, lw)| lw + self.c_n * t * y - z)).exp())
    }

    fn support(&self) -> (f64, f64) {
        self.atoms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (y, _)| (lo.min(*y), hi.max(*y)))
    }

    /// `(1/c_n) log` of the weight sitting exactly at `y`.
    fn point_rate(&self, y: f64) -> f64 {
        self.log_mass_rate(|z| (z - y).abs() <= 1e-12 * (1.0 + y.abs()))
    }
}

/// Which state weights the log-likelihood ratio of a pinched pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// `Λ_n(nt) = ψ(t | ρ̂_n ‖ σ_n)`.
    Sigma,
    /// `Λ_n(nt) = ψ(1 + t | ρ̂_n ‖ σ_n)`.
    Rho,
}

/// Measures `μ_n` at increasing `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSampleSequence {
    levels: Vec<WeightLevel>,
}

impl WeightedSampleSequence {
    pub fn new(mut levels: Vec<WeightLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(validation("sequence has no levels"));
        }
        levels.sort_by_key(|l| l.n);
        if levels.windows(2).any(|w| w[0].n == w[1].n) {
            return Err(validation("duplicate n in sequence"));
        }
        Ok(WeightedSampleSequence { levels })
    }

    /// Law of `k/n` for `k ~ Binomial(n, p)`, with `c_n = n`.
    pub fn binomial(ns: &[usize], p: f64) -> Result<Self> {
        if !(0.0 < p && p < 1.0) {
            return Err(validation("p must lie in (0, 1)"));
        }
        let levels = ns
            .iter()
            .map(|&n| {
                let mut lf = 0.0;
                let mut lfs = vec![0.0; n + 1];
                for k in 1..=n {
                    lf += (k as f64).ln();
                    lfs[k] = lf;
                }
                let atoms = (0..=n)
                    .map(|k| {
                        let lw = lfs[n] - lfs[k] - lfs[n - k] + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
                        (k as f64 / n as f64, lw)
                    })
                    .collect();
                WeightLevel::new(n, n as f64, atoms)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    /// `Y_n = (1/n) log(ρ̂_n/σ_n)` under `σ_n` or `ρ̂_n`, with `c_n = n`.
    pub fn from_classes(pairs: &[ClassicalPair], reference: Reference) -> Result<Self> {
        let levels = pairs
            .iter()
            .map(|p| {
                let n = p.n as f64;
                let atoms = p
                    .classes
                    .iter()
                    .filter(|c| c.ln_rho > f64::NEG_INFINITY && c.ln_sigma > f64::NEG_INFINITY)
                    .map(|c| {
                        let lw = c.ln_mult + if reference == Reference::Sigma { c.ln_sigma } else { c.ln_rho };
                        ((c.ln_rho - c.ln_sigma) / n, lw)
                    })
                    .collect();
                WeightLevel::new(p.n, n, atoms)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    pub fn levels(&self) -> &[WeightLevel] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> Option<&WeightLevel> {
        self.levels.iter().find(|l| l.n == n)
    }

    /// `log Σ w e^{t y}` at block size `n`.
    pub fn log_mgf(&self, n: usize, t: f64) -> Result<f64> {
        self.level(n).ok_or_else(|| validation(format!("no level n = {n}")))?.log_mgf(t)
    }

    fn last(&self) -> &WeightLevel {
        self.levels.last().expect("nonempty")
    }

    /// Level with half the largest `n`, used for the Richardson correction.
    fn half(&self) -> Option<&WeightLevel> {
        let n = self.last().n;
        (n % 2 == 0).then(|| self.level(n / 2)).flatten()
    }

    /// Largest successive change of `Λ_n(c_n t)/c_n` over the last three levels.
    pub fn cauchy_gap(&self, t: f64) -> Result<f64> {
        let k = self.levels.len();
        let tail = &self.levels[k.saturating_sub(3)..];
        let vals = tail.iter().map(|l| l.scaled_log_mgf(t)).collect::<Result<Vec<_>>>()?;
        Ok(vals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max))
    }

    pub fn rate_curve(&self) -> RateCurve<'_> {
        RateCurve { seq: self }
    }
}

/// `Λ̄` from the largest level, Richardson-corrected against `n/2` when
/// that level exists, and its Legendre transform `Λ̄*`.
#[derive(Debug, Clone, Copy)]
pub struct RateCurve<'a> {
    seq: &'a WeightedSampleSequence,
}

impl RateCurve<'_> {
    fn combine(&self, g: impl Fn(&WeightLevel) -> Result<f64>) -> Result<f64> {
        let top = g(self.seq.last())?;
        match self.seq.half() {
            Some(h) => Ok(2.0 * top - g(h)?),
            None => Ok(top),
        }
    }

    pub fn lambda_bar(&self, t: f64) -> Result<f64> {
        self.combine(|l| l.scaled_log_mgf(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.combine(|l| l.tilted_mean(t))
    }

    /// `[inf Λ̄', sup Λ̄']` as the `t → ∓∞` limits: the support extremes.
    pub fn slope_range(&self) -> (f64, f64) {
        self.seq.last().support()
    }

    /// `t_x` with `Λ̄'(t_x) = x`; requires `x` strictly inside the slope range.
    pub fn solve_slope(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.slope_range();
        if !(lo < x && x < hi) {
            return Err(domain(format!("x = {x} is outside the slope range ({lo}, {hi})")));
        }
        let d = |t: f64| self.derivative(t).unwrap_or(f64::NAN);
        let (mut a, mut b) = (-1.0, 1.0);
        while d(a) > x {
            a *= 2.0;
            if a < -1e6 {
                return Err(domain("slope root not bracketed"));
            }
        }
        while d(b) < x {
            b *= 2.0;
            if b > 1e6 {
                return Err(domain("slope root not bracketed"));
            }
        }
        Ok(bisect_increasing(|t| d(t) - x, a, b, 1e-15))
    }

    /// `Λ̄*(x) = sup_t {t x − Λ̄(t)}`.
    pub fn legendre(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.slope_range();
        if lo < x && x < hi {
            let t = self.solve_slope(x)?;
            return Ok(t * x - self.lambda_bar(t)?);
        }
        if x > hi || x < lo {
            return Ok(f64::INFINITY);
        }
        // Boundary point: the supremum is the t → ±∞ limit.
        self.combine(|l| Ok(-l.point_rate(x)))
    }

    /// `Λ̄*(Λ̄'(t)) + Λ̄(t) − t Λ̄'(t)`.
    pub fn duality_residual(&self, t: f64) -> Result<f64> {
        let d = self.derivative(t)?;
        Ok(self.legendre(d)? + self.lambda_bar(t)? - t * d)
    }
}

fn sup_over(g: impl Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let (mut bt, mut bv) = (grid[0], g(grid[0]));
    for &t in grid {
        let v = g(t);
        if v > bv {
            bt = t;
            bv = v;
        }
    }
    (bt, bv)
}

/// Shared driver for both Chernoff variants; `sign = 1` for `[x, ∞)` and
/// `−1` for `(−∞, x]`, with `t` ranging over `sign·t ≥ 0`.
fn chernoff_generic(
    lambda: impl Fn(f64) -> f64,
    x: f64,
    t_grid: &[f64],
    sign: f64,
    edge: f64,
    edge_rate: impl Fn() -> f64,
) -> f64 {
    let mut grid: Vec<f64> = t_grid.iter().map(|t| sign * t.abs()).collect();
    grid.push(0.0);
    let g = |t: f64| t * x - lambda(t);
    let (bt, _) = sup_over(&g, &grid);
    let step = grid.iter().map(|t| (t - bt).abs()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    let step = if step.is_finite() { step } else { 1.0 };
    let (lo, hi) = if sign > 0.0 { ((bt - step).max(0.0), bt + step) } else { (bt - step, (bt + step).min(0.0)) };
    let (_, refined) = golden_max(&g, lo, hi, 1e-12);
    let mut best = sup_over(&g, &grid).1.max(refined);
    // t → ±∞ limit on finite support.
    if sign * (x - edge) > 0.0 {
        return f64::NEG_INFINITY;
    }
    if (x - edge).abs() <= 1e-12 * (1.0 + x.abs()) {
        best = best.max(-edge_rate());
    }
    -best
}

/// `−sup_{t≥0}{t x − Λ̄(t)}`, an upper bound on
/// `limsup (1/c_n) log μ_n([x, ∞))`.
pub fn chernoff_upper(seq: &WeightedSampleSequence, x: f64, t_grid: &[f64]) -> Result<f64> {
    let rc = seq.rate_curve();
    rc.lambda_bar(0.0)?;
    let (_, hi) = rc.slope_range();
    Ok(chernoff_generic(|t| rc.lambda_bar(t).unwrap_or(f64::NAN), x, t_grid, 1.0, hi, || {
        rc.combine(|l| Ok(l.point_rate(hi))).unwrap_or(f64::NAN)
    }))
}

/// `−sup_{t≤0}{t x − Λ̄(t)}`, the bound for `(−∞, x]`.
pub fn chernoff_upper_lower_tail(seq: &WeightedSampleSequence, x: f64, t_grid: &[f64]) -> Result<f64> {
    let rc = seq.rate_curve();
    rc.lambda_bar(0.0)?;
    let (lo, _) = rc.slope_range();
    Ok(chernoff_generic(|t| rc.lambda_bar(t).unwrap_or(f64::NAN), x, t_grid, -1.0, lo, || {
        rc.combine(|l| Ok(l.point_rate(lo))).unwrap_or(f64::NAN)
    }))
}

/// The exact finite-`n` Markov bound `−sup_{t≥0}{t x − Λ_n(c_n t)/c_n}`.
pub fn chernoff_upper_at(level: &WeightLevel, x: f64, t_grid: &[f64]) -> Result<f64> {
    level.log_mgf(0.0)?;
    let (_, hi) = level.support();
    Ok(chernoff_generic(|t| level.scaled_log_mgf(t).unwrap_or(f64::NAN), x, t_grid, 1.0, hi, || level.point_rate(hi)))
}

/// Lower-bound margin at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerMargin {
    pub n: usize,
    /// `(1/c_n) log μ_n((x, x1))`.
    pub window_rate: f64,
    /// `−Λ̄*(x)`.
    pub predicted: f64,
    /// `window_rate − predicted`; tends to 0 from below.
    pub margin: f64,
    /// Mass of the tilted measure `μ_{n,y}` inside `(x, x+δ)`.
    pub tilted_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerCheck {
    pub x: f64,
    pub t_x: f64,
    pub rate: f64,
    pub delta: f64,
    /// Point whose tilt defines the concentration diagnostic.
    pub y: f64,
    pub t_y: f64,
    pub cauchy_gap: f64,
    pub per_n: Vec<LowerMargin>,
}

impl LowerCheck {
    /// Whether `|margin|` is nonincreasing in `n`.
    pub fn margins_shrink(&self) -> bool {
        self.per_n.windows(2).all(|w| w[1].margin.abs() <= w[0].margin.abs() + 1e-12)
    }
}

/// Empirical form of the Gärtner–Ellis lower bound on the window `(x, x1)`.
///
/// Refuses to run unless `Λ_n` has numerically converged on `t_range`
/// (successive-level changes below [`CAUCHY_TOL`]), and unless `x` lies in
/// the open slope interval `(Λ̄'(α), Λ̄'(β))`.
pub fn gartner_ellis_lower_check(seq: &WeightedSampleSequence, x: f64, window: (f64, f64), t_range: (f64, f64)) -> Result<LowerCheck> {
    let (alpha, beta) = t_range;
    if !(alpha < beta) {
        return Err(validation("t_range must be increasing"));
    }
    if !(window.0 <= x && x < window.1) {
        return Err(validation("x must lie at the left end of the window"));
    }
    let grid: Vec<f64> = (0..=16).map(|k| alpha + (beta - alpha) * k as f64 / 16.0).collect();
    let mut gap: f64 = 0.0;
    for &t in &grid {
        gap = gap.max(seq.cauchy_gap(t)?);
    }
    if gap > CAUCHY_TOL {
        return Err(domain(format!("log-MGF has not converged on the t-range (gap {gap:.3e})")));
    }
    let rc = seq.rate_curve();
    let (j_lo, j_hi) = (rc.derivative(alpha)?, rc.derivative(beta)?);
    if !(j_lo < x && x < j_hi) {
        return Err(domain(format!("x = {x} is outside the slope interval ({j_lo}, {j_hi})")));
    }
    let t_x = rc.solve_slope(x)?;
    let rate = t_x * x - rc.lambda_bar(t_x)?;
    let delta = DEFAULT_DELTA_FRACTION * (window.1 - window.0);
    let y = x + delta / 2.0;
    let t_y = rc.solve_slope(y)?;
    let per_n = seq
        .levels()
        .iter()
        .map(|l| {
            let window_rate = l.log_mass_rate(|z| z > window.0 && z < window.1);
            Ok(LowerMargin {
                n: l.n,
                window_rate,
                predicted: -rate,
                margin: window_rate + rate,
                tilted_mass: l.tilted_mass(t_y, x, x + delta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LowerCheck { x, t_x, rate, delta, y, t_y, cauchy_gap: gap, per_n })
}

/// Whether `t ↦ Λ_n(c_n t)` is midpoint convex on an increasing grid.
pub fn log_mgf_convex(level: &WeightLevel, grid: &[f64]) -> Result<bool> {
    let v = grid.iter().map(|&t| level.scaled_log_mgf(t)).collect::<Result<Vec<_>>>()?;
    Ok(v.windows(3).zip(grid.windows(3)).all(|(f, t)| {
        let w = (t[1] - t[0]) / (t[2] - t[0]);
        f[1] <= (1.0 - w) * f[0] + w * f[2] + 1e-12 * (1.0 + f[1].abs())
    }))
}

/// `KL(x ‖ p)` between Bernoulli laws.
pub fn bernoulli_kl(x: f64, p: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(x, p) + term(1.0 - x, 1.0 - p)
}
