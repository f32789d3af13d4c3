//! Polar transforms and Hoeffding anti-divergences of convex rate curves.
//!
//! For a convex `f` on `[1, ∞)` with `f(1) = 0`:
//!
//! * `f∘(a) = sup_{t>1} a(t−1) − f(t)`, zero for `a <= a_min = ∂⁺f(1)`;
//! * `H*_{f,r} = sup_{t>1} (r(t−1) − f(t))/t`;
//! * with `a_max = lim f(t)/(t−1)`, if `r < f∘(a_max) + a_max` then
//!   `H*_{f,r} = f∘(a_r)` where `r − a_r = f∘(a_r)`, otherwise
//!   `H*_{f,r} = r − a_max`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{data, domain, validation, Result};
use crate::numeric::{bisect_increasing, fit_line, golden_max};
use crate::operator::StatePair;
use crate::renyi::{PairSpectra, RenyiVariant};
use crate::Extended;

/// Default truncation point of the `t` search.
pub const DEFAULT_T_HI: f64 = 64.0;
/// A maximiser this close to the end of the search window (relative to its
/// width) counts as sitting on the boundary, and the window is doubled.
pub const BOUNDARY_FRACTION: f64 = 1e-3;
/// Convexity violations up to this size are projected away.
pub const CONVEXITY_PROJECTION_TOL: f64 = 1e-6;

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex function on `[1, ∞)` vanishing at 1.
#[derive(Clone)]
pub struct ConvexRate {
    eval: Curve,
    t_hi: f64,
    right_derivative_at_1: f64,
    slope_at_infinity: Extended,
    nodes: Option<Vec<(f64, f64)>>,
    label: String,
}

impl fmt::Debug for ConvexRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexRate")
            .field("label", &self.label)
            .field("t_hi", &self.t_hi)
            .field("right_derivative_at_1", &self.right_derivative_at_1)
            .field("slope_at_infinity", &self.slope_at_infinity)
            .finish()
    }
}

impl ConvexRate {
    /// Wraps an analytic curve and checks the convexity invariants on the
    /// truncation interval.
    pub fn analytic(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right_derivative_at_1: f64,
        slope_at_infinity: Extended,
        label: impl Into<String>,
    ) -> Result<Self> {
        let rate = ConvexRate {
            eval: Arc::new(f),
            t_hi: DEFAULT_T_HI,
            right_derivative_at_1,
            slope_at_infinity,
            nodes: None,
            label: label.into(),
        };
        rate.check_invariants()?;
        Ok(rate)
    }

    /// `c (t−1)²`.
    pub fn quadratic(c: f64) -> Result<Self> {
        if c < 0.0 {
            return Err(validation("quadratic coefficient must be nonnegative"));
        }
        let slope = if c == 0.0 { Extended::Finite(0.0) } else { Extended::Infinite };
        Self::analytic(move |t| c * (t - 1.0) * (t - 1.0), 0.0, slope, format!("quadratic({c})"))
    }

    /// `a₀ (t−1)`.
    pub fn linear(a0: f64) -> Result<Self> {
        Self::analytic(move |t| a0 * (t - 1.0), a0, Extended::Finite(a0), format!("linear({a0})"))
    }

    /// `t ↦ ψ(t|ρ‖σ)` of a state pair. The endpoints are the relative
    /// entropy and the asymptotic slope of ψ (the max-relative entropy for the
    /// sandwiched variant).
    pub fn from_pair(pair: &StatePair, variant: RenyiVariant) -> Result<Self> {
        let ps = Arc::new(PairSpectra::from_pair(pair)?);
        if !ps.supported() {
            return Err(domain("support condition fails: psi grows without bound"));
        }
        let d1 = ps.relative_entropy().expect_finite("relative entropy");
        let slope = match variant {
            RenyiVariant::Sandwiched => ps.max_relative_entropy(),
            RenyiVariant::Plain => Extended::Finite(ps.plain_max_log_ratio()),
        };
        let curve = Arc::clone(&ps);
        Self::analytic(
            move |t| curve.psi(t, variant).expect("positive order"),
            d1,
            slope,
            format!("psi_{}", variant.name()),
        )
    }

    /// Piecewise-linear convex curve through `(1, 0)` and the nodes, extended
    /// linearly beyond the last node.
    ///
    /// Near 1 the curve is the maximum of the line of slope
    /// `right_derivative` through `(1, 0)` and the extension of the second
    /// segment; without an explicit derivative the slope at 1 of the parabola
    /// through the first two nodes is used. Convexity violations smaller
    /// than `CONVEXITY_PROJECTION_TOL` are projected onto the lower convex
    /// hull.
    pub fn from_nodes(alphas: &[f64], values: &[f64], right_derivative: Option<f64>) -> Result<Self> {
        if alphas.len() != values.len() {
            return Err(validation("alphas and values differ in length"));
        }
        let mut pts: Vec<(f64, f64)> = alphas
            .iter()
            .zip(values)
            .filter(|(a, _)| **a > 1.0)
            .map(|(a, v)| (*a, *v))
            .collect();
        if pts.is_empty() {
            return Err(validation("need at least one order above 1"));
        }
        if pts.iter().any(|(a, v)| !a.is_finite() || !v.is_finite()) {
            return Err(validation("non-finite rate sample"));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(validation("repeated order in rate samples"));
        }
        let mut hull = vec![(1.0, 0.0)];
        hull.extend(pts.iter().copied());
        let hull = project_convex(&hull)?;

        let (h1, f1) = (hull[1].0 - 1.0, hull[1].1);
        let sec1 = f1 / h1;
        let b = match (right_derivative, hull.get(2)) {
            (Some(b), _) => {
                if b > sec1 + CONVEXITY_PROJECTION_TOL {
                    return Err(data(format!(
                        "right derivative {b} exceeds the first secant slope {sec1}"
                    )));
                }
                b.min(sec1)
            }
            (None, Some(&(t2, f2))) => {
                let h2 = t2 - 1.0;
                let parabola = (f1 * h2 * h2 - f2 * h1 * h1) / (h1 * h2 * (h2 - h1));
                parabola.min(sec1)
            }
            (None, None) => sec1,
        };
        let mut nodes = vec![(1.0, 0.0)];
        match hull.get(2) {
            Some(&(t2, f2)) if b < sec1 => {
                let s12 = (f2 - f1) / (t2 - hull[1].0);
                if s12 > b {
                    let knot = 1.0 + (s12 * h1 - f1) / (s12 - b);
                    if knot > 1.0 && knot < hull[1].0 {
                        nodes.push((knot, b * (knot - 1.0)));
                    }
                }
            }
            None if b < sec1 => {
                // Single node: the slope at 1 can only be the secant.
            }
            _ => {}
        }
        nodes.extend(hull[1..].iter().copied());
        let right_derivative_at_1 = (nodes[1].1 - nodes[0].1) / (nodes[1].0 - nodes[0].0);
        let k = nodes.len();
        let last_slope = (nodes[k - 1].1 - nodes[k - 2].1) / (nodes[k - 1].0 - nodes[k - 2].0);
        let table = nodes.clone();
        let rate = ConvexRate {
            eval: Arc::new(move |t| interpolate(&table, last_slope, t)),
            t_hi: DEFAULT_T_HI.max(nodes[k - 1].0),
            right_derivative_at_1,
            slope_at_infinity: Extended::Finite(last_slope),
            nodes: Some(nodes),
            label: "sampled".into(),
        };
        rate.check_invariants()?;
        Ok(rate)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }

    pub fn with_t_hi(mut self, t_hi: f64) -> Self {
        self.t_hi = t_hi.max(1.0 + 1e-6);
        self
    }

    pub fn right_derivative_at_1(&self) -> f64 {
        self.right_derivative_at_1
    }

    pub fn slope_at_infinity(&self) -> Extended {
        self.slope_at_infinity
    }

    /// `a_min = ∂⁺f(1)`.
    pub fn a_min(&self) -> f64 {
        self.right_derivative_at_1
    }

    /// `a_max = lim f(t)/(t−1)`.
    pub fn a_max(&self) -> Extended {
        self.slope_at_infinity
    }

    /// Interpolation nodes of a sampled curve.
    pub fn nodes(&self) -> Option<&[(f64, f64)]> {
        self.nodes.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Checks `f(1) = 0`, midpoint convexity and monotone secants on a dyadic
    /// grid of `[1, t_hi]`.
    pub fn check_invariants(&self) -> Result<()> {
        let f1 = self.eval(1.0);
        if f1.abs() > 1e-10 {
            return Err(data(format!("f(1) = {f1}, expected 0")));
        }
        let m = 64;
        let grid: Vec<f64> = (0..=m).map(|k| 1.0 + (self.t_hi - 1.0) * k as f64 / m as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| self.eval(t)).collect();
        for k in 1..m {
            let (a, b, c) = (vals[k - 1], vals[k], vals[k + 1]);
            let scale = 1.0 + a.abs().max(c.abs());
            if b > 0.5 * (a + c) + 1e-8 * scale {
                return Err(data(format!(
                    "convexity fails at t = ({}, {}, {}): f = ({a}, {b}, {c})",
                    grid[k - 1], grid[k], grid[k + 1]
                )));
            }
        }
        let mut last = f64::NEG_INFINITY;
        for k in 1..=m {
            let sec = vals[k] / (grid[k] - 1.0);
            if sec < last - 1e-8 * (1.0 + last.abs()) {
                return Err(data(format!("secant slope decreases at t = {}", grid[k])));
            }
            last = sec;
        }
        if let Extended::Finite(s) = self.slope_at_infinity {
            if s < self.right_derivative_at_1 - 1e-9 {
                return Err(data("slope at infinity is below the slope at 1"));
            }
        }
        Ok(())
    }
}

fn interpolate(nodes: &[(f64, f64)], last_slope: f64, t: f64) -> f64 {
    let k = nodes.len();
    if t >= nodes[k - 1].0 {
        return nodes[k - 1].1 + last_slope * (t - nodes[k - 1].0);
    }
    let i = nodes.partition_point(|p| p.0 <= t).max(1);
    let (x0, y0) = nodes[i - 1];
    let (x1, y1) = nodes[i];
    if t <= x0 {
        let s = (y1 - y0) / (x1 - x0);
        return y0 + s * (t - x0);
    }
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}

/// Lower convex hull of points sorted by abscissa.
fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Lower convex hull of points sorted by abscissa; rejects points that lie
/// above the hull by more than the projection tolerance.
fn project_convex(pts: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let hull = lower_hull(pts);
    for (i, &(x, y)) in pts.iter().enumerate() {
        let on_hull = interpolate(&hull, 0.0, x.min(hull[hull.len() - 1].0));
        if y - on_hull > CONVEXITY_PROJECTION_TOL {
            let lo = pts[i.saturating_sub(1)];
            let hi = pts[(i + 1).min(pts.len() - 1)];
            return Err(data(format!(
                "rate samples are not convex: ({}, {}), ({x}, {y}), ({}, {}) exceeds hull by {:e}",
                lo.0,
                lo.1,
                hi.0,
                hi.1,
                y - on_hull
            )));
        }
    }
    Ok(hull)
}

/// Value and maximiser of a polar transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarResult {
    pub value: Extended,
    /// Maximising `t`, absent when the supremum is only approached.
    pub t: Option<f64>,
    /// Set when the objective was still increasing at `t_hi`.
    pub tail_dominated: bool,
}

/// `f∘(a) = sup_{t>1} a(t−1) − f(t)`.
pub fn polar(f: &ConvexRate, a: f64) -> Extended {
    polar_detail(f, a).value
}

pub fn polar_detail(f: &ConvexRate, a: f64) -> PolarResult {
    if a <= f.right_derivative_at_1 {
        return PolarResult { value: Extended::Finite(0.0), t: Some(1.0), tail_dominated: false };
    }
    let g = |t: f64| a * (t - 1.0) - f.eval(t);
    let mut hi = f.t_hi;
    let mut tail = false;
    // g is concave, so a maximiser strictly inside the window is global.
    for _ in 0..40 {
        let (t, v) = golden_max(g, 1.0, hi, 1e-10 * hi);
        if t < hi - BOUNDARY_FRACTION * (hi - 1.0) {
            return PolarResult { value: Extended::Finite(v.max(0.0)), t: Some(t), tail_dominated: tail };
        }
        tail = true;
        if let Extended::Finite(s) = f.slope_at_infinity {
            if a > s {
                return PolarResult { value: Extended::Infinite, t: None, tail_dominated: true };
            }
            if a >= s {
                return PolarResult { value: polar_limit(f, a), t: None, tail_dominated: true };
            }
        }
        hi = 1.0 + 2.0 * (hi - 1.0);
    }
    PolarResult { value: Extended::Finite(g(hi)), t: None, tail_dominated: true }
}

/// `lim_{t→∞} a(t−1) − f(t)` for `a = a_max`, by evaluating along
/// `t_hi·2^k` and summing the geometric tail of the increments.
pub fn polar_limit(f: &ConvexRate, a: f64) -> Extended {
    let g = |t: f64| a * (t - 1.0) - f.eval(t);
    let mut t = f.t_hi;
    let mut prev = g(t);
    let mut prev_inc: Option<f64> = None;
    let mut growing = 0;
    for _ in 0..20 {
        t *= 2.0;
        let cur = g(t);
        let inc = cur - prev;
        if inc.abs() <= 1e-13 * (1.0 + cur.abs()) {
            return Extended::Finite(cur);
        }
        if let Some(p) = prev_inc {
            if inc > 1e-10 && inc > 0.9 * p {
                growing += 1;
                if growing >= 3 {
                    return Extended::Infinite;
                }
            } else {
                growing = 0;
            }
        }
        prev = cur;
        prev_inc = Some(inc);
    }
    match prev_inc {
        Some(inc) if inc > 0.0 => Extended::Finite(prev + inc),
        _ => Extended::Finite(prev),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Zero,
    Interior,
    LinearTail,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Zero => "zero",
            Regime::Interior => "interior",
            Regime::LinearTail => "linear_tail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingResult {
    pub r: f64,
    pub value: f64,
    pub regime: Regime,
    pub a_r: Option<f64>,
    pub attaining_t: Option<f64>,
    pub tail_dominated: bool,
}

/// Regime threshold `f∘(a_max) + a_max`, `+∞` when either term is.
pub fn regime_threshold(f: &ConvexRate) -> Extended {
    match f.a_max() {
        Extended::Infinite => Extended::Infinite,
        Extended::Finite(a_max) => match polar_limit(f, a_max) {
            Extended::Infinite => Extended::Infinite,
            Extended::Finite(p) => Extended::Finite(p.max(0.0) + a_max),
        },
    }
}

/// `H*_{f,r}` resolved through the case split on `f∘(a_max) + a_max`.
pub fn hoeffding_anti(f: &ConvexRate, r: f64) -> Result<HoeffdingResult> {
    if r < 0.0 || !r.is_finite() {
        return Err(domain(format!("r must be a nonnegative real, got {r}")));
    }
    let a_min = f.a_min();
    if r <= a_min + 1e-9 {
        return Ok(HoeffdingResult {
            r,
            value: 0.0,
            regime: Regime::Zero,
            a_r: None,
            attaining_t: None,
            tail_dominated: false,
        });
    }
    let threshold = regime_threshold(f);
    if let (Extended::Finite(th), Extended::Finite(a_max)) = (threshold, f.a_max()) {
        if r >= th {
            return Ok(HoeffdingResult {
                r,
                value: r - a_max,
                regime: Regime::LinearTail,
                a_r: Some(a_max),
                attaining_t: None,
                tail_dominated: true,
            });
        }
    }
    // f∘(a) + a is strictly increasing; f∘(a_min) + a_min < r <= f∘(r) + r.
    let upper = match f.a_max() {
        Extended::Finite(a_max) => r.min(a_max),
        Extended::Infinite => r,
    };
    let h = |a: f64| match polar(f, a) {
        Extended::Finite(p) => p + a - r,
        Extended::Infinite => f64::INFINITY,
    };
    let a_r = bisect_increasing(h, a_min, upper, 1e-14 * (1.0 + r));
    let detail = polar_detail(f, a_r);
    // f∘(a_r) = r − a_r at the root; the difference form stays accurate
    // near a_max where the maximising t runs off to infinity.
    Ok(HoeffdingResult {
        r,
        value: (r - a_r).max(0.0),
        regime: Regime::Interior,
        a_r: Some(a_r),
        attaining_t: detail.t,
        tail_dominated: detail.tail_dominated,
    })
}

/// `sup_{α>1} ((α−1)/α)(r − f(α)/(α−1))`, evaluated directly as a concave
/// maximisation in `s = 1 − 1/α` rather than through the case split.
pub fn sc_lower_bound_curve(f: &ConvexRate, r: f64) -> Result<f64> {
    if r < 0.0 || !r.is_finite() {
        return Err(domain(format!("r must be a nonnegative real, got {r}")));
    }
    let h = |s: f64| s * r - (1.0 - s) * f.eval(1.0 / (1.0 - s));
    let (_, best) = golden_max(h, 0.0, 1.0 - 1e-9, 1e-12);
    let tail = match f.a_max() {
        Extended::Finite(a_max) => r - a_max,
        Extended::Infinite => f64::NEG_INFINITY,
    };
    Ok(best.max(tail).max(0.0))
}

/// First-order extrapolation `ψ_n/N ≈ c + d/N` at one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub alpha: f64,
    pub limit: f64,
    pub correction: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct FittedRate {
    pub rate: ConvexRate,
    pub extrapolations: Vec<Extrapolation>,
    /// Extrapolated limits lowered onto their convex hull through `(1, 0)`.
    pub hull_values: Vec<f64>,
    /// Largest amount by which a limit was lowered.
    pub hull_excess: f64,
}

/// Extrapolates `ψ̄(α) = lim ψ_n(α)/n^scaling` from finite-size samples and
/// builds the convex rate through the limits.
///
/// `samples` holds `(n, [ψ_n(α) for α in alphas])`. `right_derivative`
/// optionally pins `∂⁺ψ̄(1)` (the relative-entropy rate).
pub fn rate_from_samples(
    samples: &[(usize, Vec<f64>)],
    alphas: &[f64],
    scaling: u32,
    right_derivative: Option<f64>,
) -> Result<FittedRate> {
    let mut ns: Vec<usize> = samples.iter().map(|s| s.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(validation("need at least three sample sizes"));
    }
    if samples.iter().any(|s| s.1.len() != alphas.len()) {
        return Err(validation("each sample must hold one psi value per order"));
    }
    let mut extrapolations = Vec::with_capacity(alphas.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        let x: Vec<f64> = samples.iter().map(|s| 1.0 / (s.0 as f64).powi(scaling as i32)).collect();
        let y: Vec<f64> = samples
            .iter()
            .map(|s| s.1[i] / (s.0 as f64).powi(scaling as i32))
            .collect();
        let fit = fit_line(&x, &y).ok_or_else(|| validation("degenerate sample sizes"))?;
        extrapolations.push(Extrapolation {
            alpha,
            limit: fit.intercept,
            correction: fit.slope,
            residual: fit.residual,
        });
    }
    // Each order is extrapolated on its own, so the limits can miss
    // convexity by the extrapolation error; the limit curve itself is convex.
    let mut pts: Vec<(f64, f64)> = vec![(1.0, 0.0)];
    pts.extend(extrapolations.iter().filter(|e| e.alpha > 1.0).map(|e| (e.alpha, e.limit)));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let hull = lower_hull(&pts);
    let last = hull[hull.len() - 1].0;
    let hull_values: Vec<f64> = extrapolations
        .iter()
        .map(|e| if e.alpha > 1.0 { interpolate(&hull, 0.0, e.alpha.min(last)) } else { e.limit })
        .collect();
    let hull_excess = extrapolations
        .iter()
        .zip(&hull_values)
        .map(|(e, h)| e.limit - h)
        .fold(0.0, f64::max);
    let rate = ConvexRate::from_nodes(alphas, &hull_values, right_derivative)?;
    Ok(FittedRate { rate, extrapolations, hull_values, hull_excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HermitianOperator;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polar_of_quadratic() {
        let f = ConvexRate::quadratic(1.0).unwrap();
        let p = polar_detail(&f, 2.0);
        assert_abs_diff_eq!(p.value.finite().unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.t.unwrap(), 2.0, epsilon = 1e-8);
        assert_eq!(polar(&f, -1.0), Extended::Finite(0.0));
    }

    #[test]
    fn polar_of_linear_is_infinite_above_slope() {
        let f = ConvexRate::linear(0.5).unwrap();
        assert!(polar(&f, 0.7).is_infinite());
        assert_eq!(polar(&f, 0.5), Extended::Finite(0.0));
    }

    #[test]
    fn hoeffding_of_quadratic() {
        let f = ConvexRate::quadratic(1.0).unwrap();
        let h = hoeffding_anti(&f, 3.0).unwrap();
        assert_eq!(h.regime, Regime::Interior);
        assert_abs_diff_eq!(h.value, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(h.a_r.unwrap(), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(h.attaining_t.unwrap(), 2.0, epsilon = 1e-6);
        let z = hoeffding_anti(&f, 0.0).unwrap();
        assert_eq!((z.regime, z.value), (Regime::Zero, 0.0));
        assert!(hoeffding_anti(&f, -1.0).is_err());
    }

    #[test]
    fn hoeffding_of_linear() {
        let f = ConvexRate::linear(0.5).unwrap();
        let h = hoeffding_anti(&f, 2.0).unwrap();
        assert_eq!(h.regime, Regime::LinearTail);
        assert_eq!(h.value, 1.5);
        assert_eq!(sc_lower_bound_curve(&f, 2.0).unwrap(), 1.5);
        assert_eq!(hoeffding_anti(&f, 0.4).unwrap().regime, Regime::Zero);
    }

    #[test]
    fn lower_bound_route_agrees() {
        let f = ConvexRate::quadratic(1.0).unwrap();
        assert_abs_diff_eq!(sc_lower_bound_curve(&f, 3.0).unwrap(), 1.0, epsilon = 1e-9);
        assert_eq!(sc_lower_bound_curve(&f, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn iid_samples_extrapolate_exactly() {
        let alphas = [1.5, 2.0, 3.0];
        let c = [0.1, 0.25, 0.6];
        let samples: Vec<(usize, Vec<f64>)> =
            [2usize, 4, 8].iter().map(|&n| (n, c.iter().map(|x| n as f64 * x).collect())).collect();
        let fit = rate_from_samples(&samples, &alphas, 1, None).unwrap();
        for (e, want) in fit.extrapolations.iter().zip(c) {
            assert_abs_diff_eq!(e.limit, want, epsilon = 1e-13);
            assert!(e.residual < 1e-14);
        }
    }

    #[test]
    fn offset_samples_extrapolate_to_slope() {
        let samples: Vec<(usize, Vec<f64>)> =
            [4usize, 8, 16, 32].iter().map(|&n| (n, vec![0.3 * n as f64 + 0.7])).collect();
        let fit = rate_from_samples(&samples, &[2.0], 1, None).unwrap();
        assert_abs_diff_eq!(fit.extrapolations[0].limit, 0.3, epsilon = 1e-13);
        assert_abs_diff_eq!(fit.extrapolations[0].correction, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn nonconvex_samples_rejected() {
        let err = ConvexRate::from_nodes(&[2.0, 3.0, 4.0], &[1.0, 1.1, 3.0], None).unwrap_err();
        assert!(matches!(err, crate::Error::Data(_)));
        assert!(ConvexRate::from_nodes(&[2.0, 3.0, 4.0], &[1.0, 2.0 + 5e-7, 3.0], None).is_ok());
    }

    #[test]
    fn pair_rate_matches_grid_supremum() {
        let rho = crate::sample::rotated(&[0.8, 0.2], &mut crate::sample::seeded(4));
        let sigma = HermitianOperator::diagonal(&[0.3, 0.7]);
        let pair = StatePair::new(rho, sigma).unwrap();
        let f = ConvexRate::from_pair(&pair, RenyiVariant::Sandwiched).unwrap();
        let ps = PairSpectra::from_pair(&pair).unwrap();
        let r = 0.5 * (f.a_min() + f.a_max().finite().unwrap()) + 0.2;
        let h = hoeffding_anti(&f, r).unwrap();
        let mut grid_sup = 0.0f64;
        let mut alpha = 1.0005;
        while alpha < 400.0 {
            let d = ps.divergence(alpha, RenyiVariant::Sandwiched).unwrap().finite().unwrap();
            grid_sup = grid_sup.max((alpha - 1.0) / alpha * (r - d));
            alpha += 0.001 * alpha;
        }
        assert!((h.value - grid_sup).abs() < 1e-6, "{} vs {grid_sup}", h.value);
    }
}
