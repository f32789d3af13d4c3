//! Translation-invariant fermionic quasi-free pairs: Toeplitz block symbols,
//! single-particle Rényi formulas and their Szegő limits.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{data, domain, validation, Error, Result};
use crate::operator::{hermitian_eigenvalues, HermitianOperator, C64};
use crate::renyi::RenyiVariant;

/// Fourier grid per axis for `ν = 1`.
pub const FOURIER_GRID_1D: usize = 1 << 14;
/// Fourier grid per axis for `ν = 2`.
pub const FOURIER_GRID_2D: usize = 1 << 10;
/// Quadrature grid per axis for the Szegő integrals.
pub const QUADRATURE_GRID: usize = 1 << 12;
/// Cap on the number of single-particle modes `n^ν`.
pub const MODE_CAP: usize = 4096;

/// `constant + Σ_{k≥1} cos_coeffs[k−1] cos(kx) + sin_coeffs[k−1] sin(kx)`,
/// summed over every axis for `ν = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSymbol {
    pub constant: f64,
    #[serde(default)]
    pub cos_coeffs: Vec<f64>,
    #[serde(default)]
    pub sin_coeffs: Vec<f64>,
}

impl TrigSymbol {
    pub fn constant(c: f64) -> Self {
        TrigSymbol { constant: c, cos_coeffs: vec![], sin_coeffs: vec![] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for &xi in x {
            for (k, c) in self.cos_coeffs.iter().enumerate() {
                v += c * ((k + 1) as f64 * xi).cos();
            }
            for (k, s) in self.sin_coeffs.iter().enumerate() {
                v += s * ((k + 1) as f64 * xi).sin();
            }
        }
        v
    }
}

type SymbolFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A real symbol on the torus `[0, 2π)^ν`.
#[derive(Clone)]
pub enum Symbol {
    Trig(TrigSymbol),
    Custom(SymbolFn),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Trig(t) => t.fmt(f),
            Symbol::Custom(_) => f.write_str("Symbol::Custom"),
        }
    }
}

impl Symbol {
    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Symbol::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Symbol::Trig(t) => t.eval(x),
            Symbol::Custom(f) => f(x),
        }
    }
}

impl From<TrigSymbol> for Symbol {
    fn from(t: TrigSymbol) -> Self {
        Symbol::Trig(t)
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Symbol::Trig(t) => t.serialize(s),
            Symbol::Custom(_) => Err(serde::ser::Error::custom("closure symbols cannot be serialized")),
        }
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        TrigSymbol::deserialize(d).map(Symbol::Trig)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiFreePayload {
    pub nu: usize,
    pub q_symbol: Symbol,
    pub r_symbol: Symbol,
    pub c_bound: f64,
}

fn grid_points(nu: usize, per_axis: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = per_axis.pow(nu as u32);
    (0..total).map(move |idx| {
        let mut x = vec![0.0; nu];
        let mut rest = idx;
        for k in (0..nu).rev() {
            x[k] = 2.0 * PI * (rest % per_axis) as f64 / per_axis as f64;
            rest /= per_axis;
        }
        x
    })
}

impl QuasiFreePayload {
    pub fn validate(&self) -> Result<()> {
        if self.nu != 1 && self.nu != 2 {
            return Err(validation(format!("lattice dimension {} is not supported (1 or 2)", self.nu)));
        }
        if !(self.c_bound > 0.0 && self.c_bound < 0.5) {
            return Err(validation("c_bound must lie in (0, 1/2)"));
        }
        let per_axis = if self.nu == 1 { 4096 } else { 256 };
        for x in grid_points(self.nu, per_axis) {
            for (name, s) in [("q", &self.q_symbol), ("r", &self.r_symbol)] {
                let v = s.eval(&x);
                if !(v >= self.c_bound && v <= 1.0 - self.c_bound) {
                    return Err(validation(format!(
                        "symbol {name} = {v} at {x:?} leaves [{}, {}]",
                        self.c_bound,
                        1.0 - self.c_bound
                    )));
                }
            }
        }
        Ok(())
    }

    fn modes(&self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(validation("block size must be positive"));
        }
        n.checked_pow(self.nu as u32)
            .filter(|&m| m <= MODE_CAP)
            .ok_or(Error::Resource { required: n.saturating_pow(self.nu as u32), cap: MODE_CAP })
    }
}

/// Fourier coefficients `ĉ(m) = (2π)^{−ν} ∫ s(x) e^{−i m·x} dx` on a
/// periodic grid, indexed modulo the grid size per axis.
pub struct FourierTable {
    nu: usize,
    grid: usize,
    coeffs: Vec<C64>,
}

impl FourierTable {
    pub fn new(symbol: &Symbol, nu: usize) -> Self {
        let grid = if nu == 1 { FOURIER_GRID_1D } else { FOURIER_GRID_2D };
        let mut buf: Vec<C64> = grid_points(nu, grid).map(|x| C64::new(symbol.eval(&x), 0.0)).collect();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(grid);
        for row in buf.chunks_mut(grid) {
            fft.process(row);
        }
        if nu == 2 {
            let mut col = vec![C64::new(0.0, 0.0); grid];
            for j in 0..grid {
                for i in 0..grid {
                    col[i] = buf[i * grid + j];
                }
                fft.process(&mut col);
                for i in 0..grid {
                    buf[i * grid + j] = col[i];
                }
            }
        }
        let norm = (grid as f64).powi(nu as i32);
        let coeffs = buf.into_iter().map(|z| z / norm).collect();
        FourierTable { nu, grid, coeffs }
    }

    pub fn coeff(&self, m: &[i64]) -> C64 {
        let g = self.grid as i64;
        let mut idx = 0usize;
        for k in 0..self.nu {
            idx = idx * self.grid + m[k].rem_euclid(g) as usize;
        }
        self.coeffs[idx]
    }
}

/// The (multi-level) Toeplitz compression `P_n S P_n` with entries
/// `ĉ(j − k)`, sites of the hypercube ordered lexicographically.
pub fn toeplitz_block(symbol: &Symbol, nu: usize, n: usize) -> HermitianOperator {
    let table = FourierTable::new(symbol, nu);
    let m = n.pow(nu as u32);
    let site = |idx: usize| -> Vec<i64> {
        let mut v = vec![0i64; nu];
        let mut rest = idx;
        for k in (0..nu).rev() {
            v[k] = (rest % n) as i64;
            rest /= n;
        }
        v
    };
    let sites: Vec<Vec<i64>> = (0..m).map(site).collect();
    let mut mat = DMatrix::from_fn(m, m, |a, b| {
        let diff: Vec<i64> = sites[a].iter().zip(&sites[b]).map(|(x, y)| x - y).collect();
        table.coeff(&diff)
    });
    // Enforce exact hermiticity and real-valued entries for even symbols.
    for a in 0..m {
        mat[(a, a)] = C64::new(mat[(a, a)].re, 0.0);
        for b in (a + 1)..m {
            let avg = (mat[(a, b)] + mat[(b, a)].conj()) * 0.5;
            mat[(a, b)] = avg;
            mat[(b, a)] = avg.conj();
        }
    }
    for z in mat.iter_mut() {
        if z.im.abs() < 1e-15 {
            z.im = 0.0;
        }
        if z.re.abs() < 1e-15 {
            z.re = 0.0;
        }
    }
    HermitianOperator::new(mat).expect("Hermitian by construction")
}

/// `(Q_n, R_n)` with spectra checked against the symbol bounds.
pub fn quasifree_block_symbol(payload: &QuasiFreePayload, n: usize) -> Result<(HermitianOperator, HermitianOperator)> {
    payload.modes(n)?;
    let q = toeplitz_block(&payload.q_symbol, payload.nu, n);
    let r = toeplitz_block(&payload.r_symbol, payload.nu, n);
    let (lo, hi) = (payload.c_bound - 1e-8, 1.0 - payload.c_bound + 1e-8);
    for (name, op) in [("Q_n", &q), ("R_n", &r)] {
        let (a, b) = (op.min_eigenvalue(), op.max_eigenvalue());
        if a < lo || b > hi {
            return Err(data(format!("{name} has spectrum [{a}, {b}] outside [{lo}, {hi}]")));
        }
    }
    Ok((q, r))
}

fn open_unit_spectrum(name: &str, op: &HermitianOperator) -> Result<()> {
    let (a, b) = (op.min_eigenvalue(), op.max_eigenvalue());
    if a <= 0.0 || b >= 1.0 {
        return Err(domain(format!("{name} has spectrum [{a}, {b}] not inside (0, 1)")));
    }
    Ok(())
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// ψ of the Fock-space pair with symbols `q`, `r` evaluated on single-particle
/// operators.
///
/// Sandwiched: `α Tr log(I−Q) + (1−α) Tr log(I−R) + Tr log(I + W^α)` with
/// `W = Q̂^{1/2} R̂^{(1−α)/α} Q̂^{1/2}` and `X̂ = X(I−X)^{−1}`. Plain: the
/// same determinant terms plus `Tr log(I + Q̂^{α/2} R̂^{1−α} Q̂^{α/2})`.
pub fn single_particle_psi(
    q: &HermitianOperator,
    r: &HermitianOperator,
    alpha: f64,
    variant: RenyiVariant,
) -> Result<f64> {
    if alpha <= 0.0 {
        return Err(domain(format!("order must be positive, got {alpha}")));
    }
    if q.dim() != r.dim() {
        return Err(validation("symbols differ in dimension"));
    }
    open_unit_spectrum("Q", q)?;
    open_unit_spectrum("R", r)?;
    let logdet = |op: &HermitianOperator| op.eigenvalues().iter().map(|x| (-x).ln_1p()).sum::<f64>();
    let ratio = |x: f64| x / (1.0 - x);
    let (qa, rp) = match variant {
        RenyiVariant::Sandwiched => (0.5, (1.0 - alpha) / alpha),
        RenyiVariant::Plain => (0.5 * alpha, 1.0 - alpha),
    };
    let a = q.map_spectrum(|x| ratio(x).powf(qa));
    let b = r.map_spectrum(|x| ratio(x).powf(rp));
    let w = a.matrix() * b.matrix() * a.matrix();
    let w = (&w + w.adjoint()) * C64::new(0.5, 0.0);
    let mu = hermitian_eigenvalues(&w);
    let power = match variant {
        RenyiVariant::Sandwiched => alpha,
        RenyiVariant::Plain => 1.0,
    };
    let tail: f64 = mu.iter().map(|&m| if m > 0.0 { softplus(power * m.ln()) } else { 0.0 }).sum();
    Ok(alpha * logdet(q) + (1.0 - alpha) * logdet(r) + tail)
}

/// Raw sandwiched `ψ*(α|ω_{Q_n}‖ω_{R_n})` from the block symbols.
pub fn quasifree_psi_star_singleparticle(payload: &QuasiFreePayload, n: usize, alpha: f64) -> Result<f64> {
    let (q, r) = quasifree_block_symbol(payload, n)?;
    single_particle_psi(&q, &r, alpha, RenyiVariant::Sandwiched)
}

/// Either variant of the single-particle ψ.
pub fn quasifree_psi_singleparticle(payload: &QuasiFreePayload, n: usize, alpha: f64, variant: RenyiVariant) -> Result<f64> {
    let (q, r) = quasifree_block_symbol(payload, n)?;
    single_particle_psi(&q, &r, alpha, variant)
}

/// Binary ψ `log[q^α r^{1−α} + (1−q)^α (1−r)^{1−α}]`.
pub fn binary_psi(q: f64, r: f64, alpha: f64) -> f64 {
    crate::numeric::log_add(
        alpha * q.ln() + (1.0 - alpha) * r.ln(),
        alpha * (1.0 - q).ln() + (1.0 - alpha) * (1.0 - r).ln(),
    )
}

/// Binary relative entropy `q log(q/r) + (1−q) log((1−q)/(1−r))`.
pub fn binary_relative_entropy(q: f64, r: f64) -> f64 {
    q * (q / r).ln() + (1.0 - q) * ((1.0 - q) / (1.0 - r)).ln()
}

/// Trapezoid average of `g(q(x), r(x))` over the torus on `per_axis` points.
fn torus_average(payload: &QuasiFreePayload, per_axis: usize, g: impl Fn(f64, f64) -> f64) -> f64 {
    let total = per_axis.pow(payload.nu as u32);
    let sum: f64 = grid_points(payload.nu, per_axis)
        .map(|x| g(payload.q_symbol.eval(&x), payload.r_symbol.eval(&x)))
        .sum();
    sum / total as f64
}

/// A quadrature value with the difference to the half-resolution grid as
/// its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

fn quadrature(payload: &QuasiFreePayload, g: impl Fn(f64, f64) -> f64 + Copy) -> Quadrature {
    let fine = torus_average(payload, QUADRATURE_GRID, g);
    let coarse = torus_average(payload, QUADRATURE_GRID / 2, g);
    Quadrature { value: fine, error_estimate: (fine - coarse).abs() }
}

/// `(2π)^{−ν} ∫ log[q^α r^{1−α} + (1−q)^α (1−r)^{1−α}] dx`.
pub fn szego_limit(payload: &QuasiFreePayload, alpha: f64) -> f64 {
    szego_limit_quadrature(payload, alpha).value
}

pub fn szego_limit_quadrature(payload: &QuasiFreePayload, alpha: f64) -> Quadrature {
    quadrature(payload, move |q, r| binary_psi(q, r, alpha))
}

/// `(2π)^{−ν} ∫ q log(q/r) + (1−q) log((1−q)/(1−r)) dx`.
pub fn quasifree_relent_limit(payload: &QuasiFreePayload) -> f64 {
    quadrature(payload, binary_relative_entropy).value
}

/// `(2π)^{−ν} ∫ max(log(q/r), log((1−q)/(1−r))) dx`, the asymptotic slope
/// of the Szegő curve.
pub fn quasifree_slope_limit(payload: &QuasiFreePayload) -> f64 {
    quadrature(payload, |q, r| (q / r).ln().max(((1.0 - q) / (1.0 - r)).ln())).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn payload(q: TrigSymbol, r: TrigSymbol) -> QuasiFreePayload {
        QuasiFreePayload { nu: 1, q_symbol: q.into(), r_symbol: r.into(), c_bound: 0.1 }
    }

    #[test]
    fn constant_symbol_is_scalar() {
        let q = toeplitz_block(&TrigSymbol::constant(0.3).into(), 1, 5);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 0.3 } else { 0.0 };
                assert_abs_diff_eq!(q.matrix()[(i, j)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(q.matrix()[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn cosine_symbol_is_tridiagonal() {
        let s = TrigSymbol { constant: 0.5, cos_coeffs: vec![0.2], sin_coeffs: vec![] };
        let q = toeplitz_block(&s.into(), 1, 4);
        for i in 0..4 {
            for j in 0..4 {
                let want = match (i as i64 - j as i64).abs() {
                    0 => 0.5,
                    1 => 0.1,
                    _ => 0.0,
                };
                assert_abs_diff_eq!(q.matrix()[(i, j)].re, want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn sine_symbol_gives_imaginary_offdiagonal() {
        let s = TrigSymbol { constant: 0.5, cos_coeffs: vec![], sin_coeffs: vec![0.2] };
        let q = toeplitz_block(&s.into(), 1, 3);
        // ĉ(1) = 0.2/(2i) = −0.1i sits below the diagonal.
        assert_abs_diff_eq!(q.matrix()[(1, 0)].im, -0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(q.matrix()[(0, 1)].im, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn constant_symbols_match_binary_formula() {
        let p = payload(TrigSymbol::constant(0.3), TrigSymbol::constant(0.5));
        let psi = quasifree_psi_star_singleparticle(&p, 4, 2.0).unwrap();
        assert_abs_diff_eq!(psi, 4.0 * 1.16f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(szego_limit(&p, 2.0), 1.16f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(quasifree_relent_limit(&p), binary_relative_entropy(0.3, 0.5), epsilon = 1e-14);
    }

    #[test]
    fn equal_symbols_give_zero() {
        let s = TrigSymbol { constant: 0.5, cos_coeffs: vec![0.1], sin_coeffs: vec![0.05] };
        let p = payload(s.clone(), s);
        for a in [0.5, 2.0, 3.0] {
            for v in RenyiVariant::BOTH {
                assert_abs_diff_eq!(quasifree_psi_singleparticle(&p, 6, a, v).unwrap(), 0.0, epsilon = 1e-11);
            }
            assert_abs_diff_eq!(szego_limit(&p, a), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(quasifree_relent_limit(&p), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn spectra_inside_symbol_range() {
        let s = TrigSymbol { constant: 0.5, cos_coeffs: vec![0.2, 0.05], sin_coeffs: vec![0.1] };
        let p = payload(s, TrigSymbol::constant(0.4));
        p.validate().unwrap();
        for n in [3, 8, 20] {
            let (q, _) = quasifree_block_symbol(&p, n).unwrap();
            assert!(q.min_eigenvalue() >= 0.5 - 0.35 && q.max_eigenvalue() <= 0.5 + 0.35);
        }
    }

    #[test]
    fn bound_violation_rejected() {
        let s = TrigSymbol { constant: 0.5, cos_coeffs: vec![0.45], sin_coeffs: vec![] };
        assert!(payload(s, TrigSymbol::constant(0.5)).validate().is_err());
    }

    #[test]
    fn two_dimensional_constant_symbol() {
        let p = QuasiFreePayload {
            nu: 2,
            q_symbol: TrigSymbol::constant(0.3).into(),
            r_symbol: TrigSymbol::constant(0.5).into(),
            c_bound: 0.1,
        };
        let psi = quasifree_psi_star_singleparticle(&p, 3, 2.0).unwrap();
        assert_abs_diff_eq!(psi, 9.0 * 1.16f64.ln(), epsilon = 1e-11);
    }
}
