//! Classical Markov chain pairs and their transfer-matrix Rényi quantities.

use serde::{Deserialize, Serialize};

use crate::error::{data, domain, validation, Error, Result};
use crate::numeric::{log_add, log_sum_exp};
use crate::Extended;

/// Initial distributions and row-stochastic transition matrices of the null
/// (`0`) and alternative (`1`) chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovPayload {
    pub states: usize,
    pub pi0: Vec<f64>,
    pub pi1: Vec<f64>,
    #[serde(rename = "P0")]
    pub p0: Vec<Vec<f64>>,
    #[serde(rename = "P1")]
    pub p1: Vec<Vec<f64>>,
}

fn check_distribution(name: &str, v: &[f64], d: usize) -> Result<()> {
    if v.len() != d {
        return Err(validation(format!("{name} has length {}, expected {d}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(validation(format!("{name} has negative or non-finite entries")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(validation(format!("{name} sums to {s}, expected 1")));
    }
    Ok(())
}

impl MarkovPayload {
    pub fn validate(&self) -> Result<()> {
        let d = self.states;
        if d == 0 {
            return Err(validation("Markov chain needs at least one state"));
        }
        check_distribution("pi0", &self.pi0, d)?;
        check_distribution("pi1", &self.pi1, d)?;
        for (name, p) in [("P0", &self.p0), ("P1", &self.p1)] {
            if p.len() != d {
                return Err(validation(format!("{name} has {} rows, expected {d}", p.len())));
            }
            for (i, row) in p.iter().enumerate() {
                check_distribution(&format!("{name}[{i}]"), row, d)?;
            }
        }
        for i in 0..d {
            if self.pi0[i] > 0.0 && self.pi1[i] == 0.0 {
                return Err(validation(format!("pi0[{i}] > 0 but pi1[{i}] = 0")));
            }
            for j in 0..d {
                if self.p0[i][j] > 0.0 && self.p1[i][j] == 0.0 {
                    return Err(validation(format!("P0[{i}][{j}] > 0 but P1[{i}][{j}] = 0")));
                }
            }
        }
        Ok(())
    }

    /// Strict positivity of `P1`, required before factorization claims.
    pub fn alternative_strictly_positive(&self) -> bool {
        self.p1.iter().flatten().all(|&x| x > 0.0)
    }

    /// `log(a^α b^{1−α})` with the support conventions; `None` encodes a
    /// zero entry, `Err(())` a support violation at `α > 1`.
    fn log_mix(a: f64, b: f64, alpha: f64) -> std::result::Result<Option<f64>, ()> {
        match (a > 0.0, b > 0.0) {
            (true, true) => Ok(Some(alpha * a.ln() + (1.0 - alpha) * b.ln())),
            (false, _) if alpha > 0.0 => Ok(None),
            (false, true) => Ok(Some((1.0 - alpha) * b.ln())),
            (false, false) => Ok(None),
            (true, false) if alpha > 1.0 => Err(()),
            (true, false) => Ok(None),
        }
    }

    /// Entrywise logarithm of `M_α = P0^α P1^{1−α}` (`None` for zeros).
    fn log_transfer(&self, alpha: f64) -> std::result::Result<Vec<Vec<Option<f64>>>, ()> {
        let d = self.states;
        let mut m = vec![vec![None; d]; d];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = Self::log_mix(self.p0[i][j], self.p1[i][j], alpha)?;
            }
        }
        Ok(m)
    }

    /// Path probabilities `(ρ_n(x), σ_n(x))` in lexicographic path order.
    pub fn path_probabilities(&self, n: usize, dim_cap: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.states;
        let total = d
            .checked_pow(n as u32)
            .filter(|&t| t <= dim_cap)
            .ok_or(Error::Resource { required: d.saturating_pow(n as u32), cap: dim_cap })?;
        let mut rho = Vec::with_capacity(total);
        let mut sigma = Vec::with_capacity(total);
        for idx in 0..total {
            let mut path = vec![0usize; n];
            let mut rest = idx;
            for k in (0..n).rev() {
                path[k] = rest % d;
                rest /= d;
            }
            let mut p = self.pi0[path[0]];
            let mut q = self.pi1[path[0]];
            for w in path.windows(2) {
                p *= self.p0[w[0]][w[1]];
                q *= self.p1[w[0]][w[1]];
            }
            rho.push(p);
            sigma.push(q);
        }
        Ok((rho, sigma))
    }
}

/// `ψ_n(α) = log(u_α^T M_α^{n−1} 1)`, propagated in log space.
pub fn markov_psi_n(payload: &MarkovPayload, alpha: f64, n: usize) -> Result<Extended> {
    if n == 0 {
        return Err(validation("block size must be positive"));
    }
    let d = payload.states;
    let Ok(m) = payload.log_transfer(alpha) else {
        return Ok(Extended::Infinite);
    };
    let mut v = Vec::with_capacity(d);
    for i in 0..d {
        match MarkovPayload::log_mix(payload.pi0[i], payload.pi1[i], alpha) {
            Ok(x) => v.push(x.unwrap_or(f64::NEG_INFINITY)),
            Err(()) => return Ok(Extended::Infinite),
        }
    }
    for _ in 1..n {
        let mut next = vec![f64::NEG_INFINITY; d];
        for (j, slot) in next.iter_mut().enumerate() {
            for i in 0..d {
                if let Some(l) = m[i][j] {
                    *slot = log_add(*slot, v[i] + l);
                }
            }
        }
        v = next;
    }
    Ok(Extended::Finite(log_sum_exp(v)))
}

/// Whether the directed graph of positive entries is strongly connected.
fn irreducible(m: &[Vec<Option<f64>>]) -> bool {
    let d = m.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; d];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..d {
                let edge = if forward { m[i][j] } else { m[j][i] };
                if edge.is_some() && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    reach(true) && reach(false)
}

/// Logarithm of the Perron root of `M_α` by power iteration on the
/// primitive matrix `M_α + I`.
pub fn markov_psi_limit(payload: &MarkovPayload, alpha: f64) -> Result<Extended> {
    let Ok(lm) = payload.log_transfer(alpha) else {
        return Ok(Extended::Infinite);
    };
    if !irreducible(&lm) {
        return Err(data(format!("transfer matrix at alpha = {alpha} is reducible")));
    }
    let d = payload.states;
    // Scale M by its largest entry so the shifted iteration stays well conditioned.
    let scale = lm.iter().flatten().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let m: Vec<Vec<f64>> = lm
        .iter()
        .map(|row| row.iter().map(|e| e.map_or(0.0, |l| (l - scale).exp())).collect())
        .collect();
    let mut v = vec![1.0 / d as f64; d];
    let mut lambda = 0.0;
    for _ in 0..200_000 {
        let mut w: Vec<f64> = v.clone();
        for i in 0..d {
            for j in 0..d {
                w[j] += v[i] * m[i][j];
            }
        }
        let norm: f64 = w.iter().sum();
        let next = norm - 1.0;
        w.iter_mut().for_each(|x| *x /= norm);
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        let done = (next - lambda).abs() <= 1e-15 * next.abs() && delta < 1e-15;
        lambda = next;
        if done {
            break;
        }
    }
    if lambda <= 0.0 {
        return Err(domain("Perron root is not positive"));
    }
    Ok(Extended::Finite(lambda.ln() + scale))
}

/// Maximum mean weight over cycles of the graph of `P0 > 0` with weights
/// `log(P0/P1)` (Karp), the asymptotic slope of the Perron curve.
pub fn max_cycle_mean_log_ratio(payload: &MarkovPayload) -> f64 {
    let d = payload.states;
    let w = |i: usize, j: usize| {
        (payload.p0[i][j] > 0.0).then(|| (payload.p0[i][j] / payload.p1[i][j]).ln())
    };
    let mut best = f64::NEG_INFINITY;
    for src in 0..d {
        // dist[k][v]: max weight of a walk with k edges from src to v.
        let mut dist = vec![vec![f64::NEG_INFINITY; d]; d + 1];
        dist[0][src] = 0.0;
        for k in 1..=d {
            for u in 0..d {
                if dist[k - 1][u] == f64::NEG_INFINITY {
                    continue;
                }
                for v in 0..d {
                    if let Some(x) = w(u, v) {
                        dist[k][v] = dist[k][v].max(dist[k - 1][u] + x);
                    }
                }
            }
        }
        for v in 0..d {
            if dist[d][v] == f64::NEG_INFINITY {
                continue;
            }
            let mut worst = f64::INFINITY;
            for k in 0..d {
                if dist[k][v] > f64::NEG_INFINITY {
                    worst = worst.min((dist[d][v] - dist[k][v]) / (d - k) as f64);
                }
            }
            best = best.max(worst);
        }
    }
    best
}

/// Relative-entropy rate `∂_α log λ(M_α)` at 1 by a central difference.
pub fn markov_relative_entropy_rate(payload: &MarkovPayload) -> Result<f64> {
    let h = 1e-5;
    let up = markov_psi_limit(payload, 1.0 + h)?.expect_finite("Perron curve");
    let down = markov_psi_limit(payload, 1.0 - h)?.expect_finite("Perron curve");
    Ok((up - down) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn example_chain() -> MarkovPayload {
        MarkovPayload {
            states: 2,
            pi0: vec![0.5, 0.5],
            pi1: vec![0.5, 0.5],
            p0: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            p1: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        }
    }

    fn iid_chain(p: [f64; 2], q: [f64; 2]) -> MarkovPayload {
        MarkovPayload {
            states: 2,
            pi0: p.to_vec(),
            pi1: q.to_vec(),
            p0: vec![p.to_vec(), p.to_vec()],
            p1: vec![q.to_vec(), q.to_vec()],
        }
    }

    #[test]
    fn transfer_matrix_matches_paths() {
        let c = example_chain();
        c.validate().unwrap();
        let (rho, sigma) = c.path_probabilities(2, 4096).unwrap();
        let brute: f64 = rho.iter().zip(&sigma).map(|(p, q)| p.powf(2.0) * q.powf(-1.0)).sum();
        let tm = markov_psi_n(&c, 2.0, 2).unwrap().finite().unwrap();
        assert_abs_diff_eq!(tm, brute.ln(), epsilon = 1e-14);
    }

    #[test]
    fn normalized_chain_has_zero_psi_at_one() {
        let c = example_chain();
        for n in [1, 5, 50] {
            assert_abs_diff_eq!(markov_psi_n(&c, 1.0, n).unwrap().finite().unwrap(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn iid_chain_is_additive() {
        let (p, q) = ([0.3, 0.7], [0.6, 0.4]);
        let c = iid_chain(p, q);
        let a = 2.5;
        let single: f64 = p.iter().zip(&q).map(|(x, y)| x.powf(a) * y.powf(1.0 - a)).sum::<f64>().ln();
        assert_abs_diff_eq!(markov_psi_n(&c, a, 7).unwrap().finite().unwrap(), 7.0 * single, epsilon = 1e-12);
        assert_abs_diff_eq!(markov_psi_limit(&c, a).unwrap().finite().unwrap(), single, epsilon = 1e-12);
    }

    #[test]
    fn limit_matches_long_chain() {
        let c = example_chain();
        let lim = markov_psi_limit(&c, 2.0).unwrap().finite().unwrap();
        let n = 2048;
        let finite = markov_psi_n(&c, 2.0, n).unwrap().finite().unwrap() / n as f64;
        assert!((lim - finite).abs() < 1e-3);
        // Perron root of [[1.62, 0.02], [0.08, 1.28]].
        let (a, b, cc, d): (f64, f64, f64, f64) = (1.62, 0.02, 0.08, 1.28);
        let root = 0.5 * (a + d + ((a - d) * (a - d) + 4.0 * b * cc).sqrt());
        assert_abs_diff_eq!(lim, f64::ln(root), epsilon = 1e-12);
    }

    #[test]
    fn support_violation_is_infinite() {
        let mut c = example_chain();
        c.p0 = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        c.p1 = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert!(c.validate().is_err());
        assert!(markov_psi_n(&c, 2.0, 3).unwrap().is_infinite());
    }

    #[test]
    fn reducible_chain_rejected() {
        let c = MarkovPayload {
            states: 2,
            pi0: vec![0.5, 0.5],
            pi1: vec![0.5, 0.5],
            p0: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            p1: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        };
        assert!(matches!(markov_psi_limit(&c, 2.0), Err(Error::Data(_))));
    }

    #[test]
    fn cycle_mean_is_asymptotic_slope() {
        let c = example_chain();
        let slope = max_cycle_mean_log_ratio(&c);
        assert_abs_diff_eq!(slope, (0.9f64 / 0.5).ln(), epsilon = 1e-14);
        let t = 400.0;
        let est = markov_psi_limit(&c, t).unwrap().finite().unwrap() / (t - 1.0);
        assert!((est - slope).abs() < 5e-3);
    }
}
