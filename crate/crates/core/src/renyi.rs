//! Plain and sandwiched Rényi quantities on explicit operator pairs.
//!
//! Both operators are diagonalised once; every trace below is then evaluated
//! in the joint basis through the overlap matrix `O = V_ρ† V_σ`, e.g.
//! `Tr ρ^t σ^{1−t} = Σ_ij r_i^t s_j^{1−t} |O_ij|²`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::log_sum_exp;
use crate::operator::{support_contained, HermitianOperator, StatePair, C64};
use crate::Extended;

/// Tolerance on eigenvector leakage used to decide `supp ρ ⊆ supp σ`.
pub const SUPPORT_LEAK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenyiVariant {
    Plain,
    Sandwiched,
}

impl RenyiVariant {
    pub const BOTH: [RenyiVariant; 2] = [RenyiVariant::Plain, RenyiVariant::Sandwiched];

    pub fn name(self) -> &'static str {
        match self {
            RenyiVariant::Plain => "plain",
            RenyiVariant::Sandwiched => "sandwiched",
        }
    }
}

impl std::str::FromStr for RenyiVariant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(RenyiVariant::Plain),
            "sandwiched" => Ok(RenyiVariant::Sandwiched),
            other => Err(crate::error::validation(format!("unknown variant {other:?}"))),
        }
    }
}

/// `Q`, `ψ = log Q` and `D_α` at one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiValue {
    pub alpha: f64,
    pub variant: RenyiVariant,
    pub q: f64,
    pub psi: f64,
    pub divergence: Extended,
}

/// Joint spectral data of a pair, reusable across orders `t`.
#[derive(Debug, Clone)]
pub struct PairSpectra {
    /// Eigenvalues of ρ with sub-cutoff values set to zero.
    r: Vec<f64>,
    /// Eigenvalues of σ with sub-cutoff values set to zero.
    s: Vec<f64>,
    /// `|O_ij|²`.
    weights: DMatrix<f64>,
    overlap: DMatrix<C64>,
    trace_rho: f64,
    supported: bool,
}

fn clipped(op: &HermitianOperator) -> Result<Vec<f64>> {
    op.check_psd()?;
    let cut = op.support_cutoff();
    Ok(op.eigenvalues().iter().map(|&x| if x > cut { x } else { 0.0 }).collect())
}

impl PairSpectra {
    pub fn new(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(crate::error::validation("rho and sigma differ in dimension"));
        }
        let r = clipped(rho)?;
        let s = clipped(sigma)?;
        let overlap = rho.spectrum().vectors.adjoint() * &sigma.spectrum().vectors;
        let weights = overlap.map(|z| z.norm_sqr());
        let supported = support_contained(rho, sigma, SUPPORT_LEAK_TOL)?;
        Ok(PairSpectra { r, s, weights, overlap, trace_rho: rho.trace(), supported, })
    }

    pub fn from_pair(pair: &StatePair) -> Result<Self> {
        Self::new(pair.rho(), pair.sigma())
    }

    /// Whether `supp ρ ⊆ supp σ`.
    pub fn supported(&self) -> bool {
        self.supported
    }

    pub fn trace_rho(&self) -> f64 {
        self.trace_rho
    }

    /// `max log(r_i/s_j)` over overlapping eigenvector pairs, the
    /// asymptotic slope of the plain ψ.
    pub fn plain_max_log_ratio(&self) -> f64 {
        let d = self.r.len();
        let mut best = f64::NEG_INFINITY;
        for i in 0..d {
            for j in 0..d {
                if self.r[i] > 0.0 && self.s[j] > 0.0 && self.weights[(i, j)] > 1e-20 {
                    best = best.max((self.r[i] / self.s[j]).ln());
                }
            }
        }
        best
    }

    /// `log Q_t`, `−∞` when `Q_t = 0`.
    fn plain_psi(&self, t: f64) -> f64 {
        let d = self.r.len();
        let mut terms = Vec::with_capacity(d * d);
        for i in 0..d {
            if self.r[i] == 0.0 {
                continue;
            }
            let a = t * self.r[i].ln();
            for j in 0..d {
                let w = self.weights[(i, j)];
                if self.s[j] == 0.0 || w == 0.0 {
                    continue;
                }
                terms.push(a + (1.0 - t) * self.s[j].ln() + w.ln());
            }
        }
        log_sum_exp(terms)
    }

    /// The operator `ρ^{1/2} σ^{(1−t)/t} ρ^{1/2}` expressed in ρ's eigenbasis
    /// restricted to supp ρ, divided by `e^{shift}`. Also returns the
    /// matching block of `ρ^{1/2} σ^{(1−t)/t} (log σ) ρ^{1/2}` on the same
    /// scale.
    fn sandwich_blocks(&self, t: f64, with_log: bool) -> (DMatrix<C64>, Option<DMatrix<C64>>, f64) {
        let p = (1.0 - t) / t;
        let rows: Vec<usize> = (0..self.r.len()).filter(|&i| self.r[i] > 0.0).collect();
        let cols: Vec<usize> = (0..self.s.len()).filter(|&j| self.s[j] > 0.0).collect();
        let log_sp: Vec<f64> = cols.iter().map(|&j| p * self.s[j].ln()).collect();
        let shift = log_sp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k = rows.len();
        // A = diag(√r) O restricted, B = A diag(s^p)
        let a = DMatrix::from_fn(k, cols.len(), |i, j| {
            self.overlap[(rows[i], cols[j])] * self.r[rows[i]].sqrt()
        });
        let mut b = a.clone();
        for (j, mut col) in b.column_iter_mut().enumerate() {
            col *= C64::new((log_sp[j] - shift).exp(), 0.0);
        }
        let m = &b * a.adjoint();
        let l = with_log.then(|| {
            let mut bl = b.clone();
            for (j, mut col) in bl.column_iter_mut().enumerate() {
                col *= C64::new(self.s[cols[j]].ln(), 0.0);
            }
            bl * a.adjoint()
        });
        (m, l, shift)
    }

    /// `log Q*_t`, `−∞` when `Q*_t = 0`.
    fn sandwiched_psi(&self, t: f64) -> f64 {
        let (m, _, shift) = self.sandwich_blocks(t, false);
        if m.nrows() == 0 {
            return f64::NEG_INFINITY;
        }
        let op = HermitianOperator::from_hermitian_unchecked(hermitian_part(m));
        let mu = positive_values(&op);
        t * shift + log_sum_exp(mu.iter().map(|x| t * x.ln()))
    }

    /// `ψ(t) = log Q_t` for the chosen variant.
    pub fn psi(&self, t: f64, variant: RenyiVariant) -> Result<f64> {
        match variant {
            RenyiVariant::Plain => Ok(self.plain_psi(t)),
            RenyiVariant::Sandwiched => {
                if t <= 0.0 {
                    return Err(domain(format!("sandwiched order must be positive, got {t}")));
                }
                Ok(self.sandwiched_psi(t))
            }
        }
    }

    pub fn q(&self, t: f64, variant: RenyiVariant) -> Result<f64> {
        Ok(self.psi(t, variant)?.exp())
    }

    /// `D_α` with the `+∞` convention; `α = 1` is the relative entropy.
    pub fn divergence(&self, alpha: f64, variant: RenyiVariant) -> Result<Extended> {
        if alpha < 0.0 {
            return Err(domain(format!("negative order {alpha}")));
        }
        if alpha == 1.0 {
            return Ok(self.relative_entropy());
        }
        if alpha > 1.0 && !self.supported {
            return Ok(Extended::Infinite);
        }
        let psi = self.psi(alpha, variant)?;
        if psi == f64::NEG_INFINITY {
            return Ok(Extended::Infinite);
        }
        Ok(Extended::Finite((psi - self.trace_rho.ln()) / (alpha - 1.0)))
    }

    pub fn value(&self, alpha: f64, variant: RenyiVariant) -> Result<RenyiValue> {
        let psi = self.psi(alpha, variant)?;
        Ok(RenyiValue { alpha, variant, q: psi.exp(), psi, divergence: self.divergence(alpha, variant)? })
    }

    /// `(1/Tr ρ)[Tr ρ log ρ − Tr ρ log σ]`.
    pub fn relative_entropy(&self) -> Extended {
        if !self.supported {
            return Extended::Infinite;
        }
        let d = self.r.len();
        let mut acc = 0.0;
        for i in 0..d {
            if self.r[i] == 0.0 {
                continue;
            }
            let mut cross = 0.0;
            for j in 0..d {
                if self.s[j] > 0.0 {
                    cross += self.weights[(i, j)] * self.s[j].ln();
                }
            }
            acc += self.r[i] * (self.r[i].ln() - cross);
        }
        Extended::Finite(acc / self.trace_rho)
    }

    /// `log λ_max(σ^{−1/2} ρ σ^{−1/2})` on supp σ.
    pub fn max_relative_entropy(&self) -> Extended {
        if !self.supported {
            return Extended::Infinite;
        }
        let cols: Vec<usize> = (0..self.s.len()).filter(|&j| self.s[j] > 0.0).collect();
        let d = self.r.len();
        // X = diag(√r) O diag(s^{-1/2}); σ^{-1/2}ρσ^{-1/2} ≅ X† X, same nonzero spectrum as X X†.
        let x = DMatrix::from_fn(d, cols.len(), |i, j| {
            self.overlap[(i, cols[j])] * (self.r[i].sqrt() / self.s[cols[j]].sqrt())
        });
        let g = x.adjoint() * x;
        let op = HermitianOperator::from_hermitian_unchecked(hermitian_part(g));
        Extended::Finite(op.max_eigenvalue().ln())
    }

    /// `dψ/dt` in closed form.
    pub fn psi_derivative(&self, t: f64, variant: RenyiVariant) -> Result<f64> {
        match variant {
            RenyiVariant::Plain => self.plain_derivative(t),
            RenyiVariant::Sandwiched => self.sandwiched_derivative(t),
        }
    }

    fn plain_derivative(&self, t: f64) -> Result<f64> {
        let psi = self.plain_psi(t);
        if psi == f64::NEG_INFINITY {
            return Err(domain("rho sigma = 0: psi is not differentiable"));
        }
        let d = self.r.len();
        let mut acc = 0.0;
        for i in 0..d {
            if self.r[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = self.weights[(i, j)];
                if self.s[j] == 0.0 || w == 0.0 {
                    continue;
                }
                let (lr, ls) = (self.r[i].ln(), self.s[j].ln());
                acc += (t * lr + (1.0 - t) * ls + w.ln() - psi).exp() * (lr - ls);
            }
        }
        Ok(acc)
    }

    fn sandwiched_derivative(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(domain(format!("sandwiched order must be positive, got {t}")));
        }
        let (m, l, shift) = self.sandwich_blocks(t, true);
        let l = l.expect("requested");
        let op = HermitianOperator::from_hermitian_unchecked(hermitian_part(m));
        let sp = op.spectrum();
        let cut = op.support_cutoff();
        let log_q_scaled = log_sum_exp(
            sp.values.iter().filter(|&&x| x > cut).map(|x| t * x.ln()),
        );
        if log_q_scaled == f64::NEG_INFINITY {
            return Err(domain("rho sigma = 0: psi is not differentiable"));
        }
        // M = e^{shift} K; Tr M^t log M = e^{t·shift} Σ μ^t (log μ + shift).
        let mut first = 0.0;
        let mut second = 0.0;
        for (k, &mu) in sp.values.iter().enumerate() {
            if mu <= cut {
                continue;
            }
            let w = (t * mu.ln() - log_q_scaled).exp();
            first += w * (mu.ln() + shift);
            let v = sp.vectors.column(k);
            let lkk = v.dotc(&(&l * v)).re;
            second += w * lkk / mu;
        }
        Ok(first - second / t)
    }
}

fn hermitian_part(m: DMatrix<C64>) -> DMatrix<C64> {
    let adj = m.adjoint();
    (m + adj) * C64::new(0.5, 0.0)
}

fn positive_values(op: &HermitianOperator) -> Vec<f64> {
    let cut = op.support_cutoff();
    crate::operator::hermitian_eigenvalues(op.matrix()).into_iter().filter(|&x| x > cut).collect()
}

/// `Q_t` or `Q*_t` of a PSD pair (trace one is not required).
pub fn q_value(rho: &HermitianOperator, sigma: &HermitianOperator, t: f64, variant: RenyiVariant) -> Result<f64> {
    PairSpectra::new(rho, sigma)?.q(t, variant)
}

/// `ψ = log Q` for the chosen variant.
pub fn psi(rho: &HermitianOperator, sigma: &HermitianOperator, t: f64, variant: RenyiVariant) -> Result<f64> {
    PairSpectra::new(rho, sigma)?.psi(t, variant)
}

pub fn renyi_divergence(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    variant: RenyiVariant,
) -> Result<Extended> {
    PairSpectra::new(rho, sigma)?.divergence(alpha, variant)
}

pub fn relative_entropy(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Extended> {
    Ok(PairSpectra::new(rho, sigma)?.relative_entropy())
}

pub fn max_relative_entropy(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Extended> {
    Ok(PairSpectra::new(rho, sigma)?.max_relative_entropy())
}

pub fn psi_derivative(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    t: f64,
    variant: RenyiVariant,
) -> Result<f64> {
    PairSpectra::new(rho, sigma)?.psi_derivative(t, variant)
}

/// Residuals of the scaling identities
/// `ψ(α|λρ‖κσ) = α log λ + (1−α) log κ + ψ(α|ρ‖σ)` and
/// `D_α(λρ‖κσ) = D_α(ρ‖σ) + log λ − log κ`.
pub fn scaling_check(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    lambda: f64,
    kappa: f64,
    alpha: f64,
    variant: RenyiVariant,
) -> Result<(f64, f64)> {
    if lambda <= 0.0 || kappa <= 0.0 {
        return Err(domain("scaling factors must be positive"));
    }
    let base = PairSpectra::new(rho, sigma)?;
    let scaled = PairSpectra::new(&rho.scale(lambda), &sigma.scale(kappa))?;
    let psi_res = (scaled.psi(alpha, variant)?
        - alpha * lambda.ln()
        - (1.0 - alpha) * kappa.ln()
        - base.psi(alpha, variant)?)
    .abs();
    let d_res = match (scaled.divergence(alpha, variant)?, base.divergence(alpha, variant)?) {
        (Extended::Finite(a), Extended::Finite(b)) => (a - b - lambda.ln() + kappa.ln()).abs(),
        (Extended::Infinite, Extended::Infinite) => 0.0,
        _ => f64::INFINITY,
    };
    Ok((psi_res, d_res))
}

/// Classical Rényi divergence `(1/(α−1)) log Σ p^α q^{1−α} / Σ p` of two
/// nonnegative vectors, with the same `+∞` conventions as the quantum case.
pub fn classical_renyi(p: &[f64], q: &[f64], alpha: f64) -> Extended {
    let total: f64 = p.iter().sum();
    if alpha == 1.0 {
        let mut acc = 0.0;
        for (&pi, &qi) in p.iter().zip(q) {
            if pi > 0.0 {
                if qi <= 0.0 {
                    return Extended::Infinite;
                }
                acc += pi * (pi / qi).ln();
            }
        }
        return Extended::Finite(acc / total);
    }
    let mut terms = Vec::new();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 && qi > 0.0 {
            terms.push(alpha * pi.ln() + (1.0 - alpha) * qi.ln());
        } else if pi > 0.0 && alpha > 1.0 {
            return Extended::Infinite;
        }
    }
    let psi = log_sum_exp(terms);
    if psi == f64::NEG_INFINITY {
        return Extended::Infinite;
    }
    Extended::Finite((psi - total.ln()) / (alpha - 1.0))
}
