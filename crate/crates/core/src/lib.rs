//! Rényi divergences, Hoeffding anti-divergences and finite-size
//! Neyman–Pearson exponents for i.i.d. and correlated quantum state families.
//!
//! | quantity | definition |
//! |---|---|
//! | `Q_t(ρ‖σ)` | `Tr ρ^t σ^{1−t}` |
//! | `Q*_t(ρ‖σ)` | `Tr (ρ^{1/2} σ^{(1−t)/t} ρ^{1/2})^t` |
//! | `ψ`, `ψ*` | `log Q_t`, `log Q*_t` |
//! | `D_α` | `(ψ(α) − log Tr ρ)/(α − 1)` |
//! | `f∘(a)` | `sup_{t>1} a(t−1) − f(t)` |
//! | `H*_{f,r}` | `sup_{t>1} (r(t−1) − f(t))/t` |
//!
//! Matrix functions act on supports: `A^0` is the support projection and
//! `log A` vanishes on the kernel.
#![forbid(unsafe_code)]

pub mod error;
pub mod families;
pub mod hoeffding;
pub mod ldp;
pub mod numeric;
pub mod operator;
pub mod renyi;
pub mod sample;
pub mod testing;

pub use error::{Error, Result};
pub use operator::{HermitianOperator, StatePair, Test};

use serde::{Deserialize, Serialize};

/// A real number or `+∞`, kept as a tag so infinities never enter arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// Panics on `+∞`; for callers that have already excluded it.
    pub fn expect_finite(self, what: &str) -> f64 {
        self.finite().unwrap_or_else(|| panic!("{what} is +inf"))
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/renyi.md")]
    mod renyi {}
    #[doc = include_str!("../../../book/src/hoeffding.md")]
    mod hoeffding {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../book/src/ldp.md")]
    mod ldp {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
