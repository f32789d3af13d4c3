//! Correlated state sequences `{(ρ_n, σ_n)}` and their asymptotic ψ curves.

pub mod fock;
pub mod gibbs;
pub mod markov;
pub mod quasifree;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::hoeffding::{rate_from_samples, ConvexRate};
use crate::operator::{tensor_power, HermitianOperator, StatePair};
use crate::renyi::{PairSpectra, RenyiVariant};
use crate::Extended;

pub use fock::fock_density;
pub use gibbs::{factorization_certificate, gibbs_local_hamiltonian, gibbs_state, GibbsPayload};
pub use markov::{markov_psi_limit, markov_psi_n, MarkovPayload};
pub use quasifree::{
    quasifree_block_symbol, quasifree_psi_star_singleparticle, quasifree_relent_limit, szego_limit,
    QuasiFreePayload, Symbol, TrigSymbol,
};

/// Single-copy pair repeated as `ρ^{⊗n}`, `σ^{⊗n}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IidPayload {
    pub rho: HermitianOperator,
    pub sigma: HermitianOperator,
}

/// Two interactions on the same site space, one per hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GibbsPairPayload {
    pub rho: GibbsPayload,
    pub sigma: GibbsPayload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Family {
    Iid(IidPayload),
    Markov(MarkovPayload),
    Gibbs(GibbsPairPayload),
    Quasifree(QuasiFreePayload),
}

/// A family with its per-`n` scaling exponent (`N = n^scaling`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFamilySpec {
    pub scaling_exponent: u32,
    #[serde(flatten)]
    pub family: Family,
}

impl StateFamilySpec {
    pub fn new(family: Family) -> Self {
        let scaling_exponent = match &family {
            Family::Quasifree(q) => q.nu as u32,
            _ => 1,
        };
        StateFamilySpec { scaling_exponent, family }
    }

    pub fn kind(&self) -> &'static str {
        match self.family {
            Family::Iid(_) => "iid",
            Family::Markov(_) => "markov",
            Family::Gibbs(_) => "gibbs",
            Family::Quasifree(_) => "quasifree",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scaling_exponent == 0 {
            return Err(validation("scaling_exponent must be positive"));
        }
        match &self.family {
            Family::Iid(p) => StatePair::new(p.rho.clone(), p.sigma.clone()).map(|_| ()),
            Family::Markov(p) => p.validate(),
            Family::Gibbs(p) => {
                p.rho.validate()?;
                p.sigma.validate()?;
                if p.rho.site_dim != p.sigma.site_dim {
                    return Err(validation("rho and sigma interactions differ in site dimension"));
                }
                Ok(())
            }
            Family::Quasifree(p) => {
                p.validate()?;
                if self.scaling_exponent as usize != p.nu {
                    return Err(validation("quasifree scaling_exponent must equal nu"));
                }
                Ok(())
            }
        }
    }

    /// `N = n^scaling`.
    pub fn scaled(&self, n: usize) -> f64 {
        (n as f64).powi(self.scaling_exponent as i32)
    }

    /// Whether every `ρ_n`, `σ_n` is diagonal in a common product basis.
    pub fn is_classical(&self) -> bool {
        match &self.family {
            Family::Markov(_) => true,
            Family::Iid(p) => is_diagonal(&p.rho) && is_diagonal(&p.sigma),
            _ => false,
        }
    }
}

pub(crate) fn is_diagonal(op: &HermitianOperator) -> bool {
    let m = op.matrix();
    (0..op.dim()).all(|i| (0..op.dim()).all(|j| i == j || m[(i, j)].norm() == 0.0))
}

/// The explicit pair `(ρ_n, σ_n)`.
pub fn family_states(spec: &StateFamilySpec, n: usize, dim_cap: usize) -> Result<StatePair> {
    if n == 0 {
        return Err(validation("block size must be positive"));
    }
    match &spec.family {
        Family::Iid(p) => StatePair::new(tensor_power(&p.rho, n, dim_cap)?, tensor_power(&p.sigma, n, dim_cap)?),
        Family::Markov(p) => {
            let (rho, sigma) = p.path_probabilities(n, dim_cap)?;
            StatePair::new(HermitianOperator::diagonal(&rho), HermitianOperator::diagonal(&sigma))
        }
        Family::Gibbs(p) => StatePair::new(gibbs_state(&p.rho, n, dim_cap)?, gibbs_state(&p.sigma, n, dim_cap)?),
        Family::Quasifree(p) => {
            let modes = n.pow(p.nu as u32);
            if modes > fock::FOCK_MODE_CAP || (1usize << modes) > dim_cap {
                return Err(crate::Error::Resource {
                    required: 1usize.checked_shl(modes as u32).unwrap_or(usize::MAX),
                    cap: dim_cap.min(1 << fock::FOCK_MODE_CAP),
                });
            }
            let (q, r) = quasifree_block_symbol(p, n)?;
            StatePair::new(fock_density(&q)?, fock_density(&r)?)
        }
    }
}

/// Raw `ψ_n(α)` of the family at block size `n`, using the cheapest exact
/// route for the kind.
pub fn family_psi(spec: &StateFamilySpec, n: usize, alpha: f64, variant: RenyiVariant, dim_cap: usize) -> Result<Extended> {
    match &spec.family {
        Family::Iid(p) => {
            let ps = PairSpectra::new(&p.rho, &p.sigma)?;
            Ok(Extended::Finite(n as f64 * ps.psi(alpha, variant)?))
        }
        Family::Markov(p) => markov_psi_n(p, alpha, n),
        Family::Quasifree(p) => Ok(Extended::Finite(quasifree::quasifree_psi_singleparticle(p, n, alpha, variant)?)),
        Family::Gibbs(_) => {
            let pair = family_states(spec, n, dim_cap)?;
            Ok(Extended::Finite(PairSpectra::from_pair(&pair)?.psi(alpha, variant)?))
        }
    }
}

/// Default order grid for sampled rate curves.
pub const DEFAULT_RATE_ALPHAS: [f64; 12] = [1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 16.0, 32.0];

/// The asymptotic sandwiched curve `ψ̄*` of the family.
///
/// i.i.d. pairs are exact by additivity, Markov chains use the Perron root,
/// quasi-free pairs the Szegő integral; Gibbs pairs are extrapolated from
/// `ψ*_n` at `sample_ns`.
pub fn family_rate(spec: &StateFamilySpec, sample_ns: &[usize], dim_cap: usize) -> Result<ConvexRate> {
    match &spec.family {
        Family::Iid(p) => ConvexRate::from_pair(&StatePair::new(p.rho.clone(), p.sigma.clone())?, RenyiVariant::Sandwiched),
        Family::Markov(p) => {
            let d1 = markov::markov_relative_entropy_rate(p)?;
            let slope = markov::max_cycle_mean_log_ratio(p);
            let chain = p.clone();
            ConvexRate::analytic(
                move |t| markov_psi_limit(&chain, t).map(|v| v.expect_finite("Perron curve")).unwrap_or(f64::NAN),
                d1,
                Extended::Finite(slope),
                "markov_perron",
            )
        }
        Family::Quasifree(p) => {
            let d1 = quasifree_relent_limit(p);
            let slope = quasifree::quasifree_slope_limit(p);
            let payload = p.clone();
            ConvexRate::analytic(move |t| szego_limit(&payload, t), d1, Extended::Finite(slope), "szego")
        }
        Family::Gibbs(_) => {
            let mut samples = Vec::new();
            let mut d1s = Vec::new();
            for &n in sample_ns {
                let pair = family_states(spec, n, dim_cap)?;
                let ps = PairSpectra::from_pair(&pair)?;
                let psis = DEFAULT_RATE_ALPHAS
                    .iter()
                    .map(|&a| ps.psi(a, RenyiVariant::Sandwiched))
                    .collect::<Result<Vec<f64>>>()?;
                samples.push((n, psis));
                d1s.push((n, ps.relative_entropy().expect_finite("relative entropy")));
            }
            let x: Vec<f64> = d1s.iter().map(|(n, _)| 1.0 / *n as f64).collect();
            let y: Vec<f64> = d1s.iter().map(|(n, d)| d / *n as f64).collect();
            let d1 = crate::numeric::fit_line(&x, &y).map(|f| f.intercept);
            let fitted = rate_from_samples(&samples, &DEFAULT_RATE_ALPHAS, spec.scaling_exponent, None)?;
            // Pin the slope at 1 to the extrapolated relative-entropy rate when compatible.
            match d1 {
                Some(d1) => {
                    ConvexRate::from_nodes(&DEFAULT_RATE_ALPHAS, &fitted.hull_values, Some(d1)).or(Ok(fitted.rate))
                }
                None => Ok(fitted.rate),
            }
        }
    }
}
