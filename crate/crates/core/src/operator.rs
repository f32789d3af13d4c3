//! Dense Hermitian operators with cached spectral decompositions.
//!
//! Matrix functions follow the support convention used throughout the crate:
//! powers and logarithms of a positive semidefinite operator act on its
//! support only, so `A^0` is the support projection and `log A` vanishes on
//! the kernel. The support is decided by a *relative* cutoff: eigenvalues at
//! or below `SUPPORT_TOL * λ_max` count as zero.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};

pub type C64 = Complex64;

/// Relative hermiticity tolerance applied on construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Relative eigenvalue cutoff that defines the support of a PSD operator.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Relative gap below which neighbouring eigenvalues share a spectral cluster.
pub const CLUSTER_TOL: f64 = 1e-10;
/// Default cap on the global Hilbert space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Slack used when certifying `0 <= T <= I` for tests.
pub const TEST_SLACK: f64 = 1e-10;

/// Eigenvalues in ascending order together with orthonormal eigenvectors
/// stored column-wise.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    fn sorted(values: Vec<f64>, vectors: DMatrix<C64>) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return Spectrum { values, vectors };
        }
        let d = vectors.nrows();
        let mut sorted_vectors = DMatrix::zeros(d, order.len());
        for (new, &old) in order.iter().enumerate() {
            sorted_vectors.set_column(new, &vectors.column(old));
        }
        Spectrum {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: sorted_vectors,
        }
    }

    /// Largest eigenvalue magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn eigen(matrix: &DMatrix<C64>) -> Spectrum {
    let d = matrix.nrows();
    if d == 0 {
        return Spectrum { values: vec![], vectors: DMatrix::zeros(0, 0) };
    }
    if is_real(matrix) {
        let real = matrix.map(|z| z.re);
        let eig = real.symmetric_eigen();
        let vectors = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        return Spectrum::sorted(eig.eigenvalues.iter().copied().collect(), vectors);
    }
    let eig = matrix.clone().symmetric_eigen();
    Spectrum::sorted(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Eigenvalues of a Hermitian matrix without accumulating eigenvectors,
/// in ascending order.
pub fn hermitian_eigenvalues(matrix: &DMatrix<C64>) -> Vec<f64> {
    let mut values: Vec<f64> = if matrix.nrows() == 0 {
        vec![]
    } else if is_real(matrix) {
        matrix.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        matrix.symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// `V diag(values) V†`.
fn reconstruct(values: &[f64], vectors: &DMatrix<C64>) -> DMatrix<C64> {
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(values[j], 0.0);
    }
    let mut out = scaled * vectors.adjoint();
    symmetrize(&mut out);
    out
}

fn symmetrize(m: &mut DMatrix<C64>) {
    let d = m.nrows();
    for i in 0..d {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..d {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// A dense complex Hermitian matrix.
///
/// The spectral decomposition is computed at most once and shared between
/// clones. Operators built as tensor powers carry symbolic cluster labels so
/// that exact degeneracies survive floating-point rounding.
#[derive(Clone)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
    spectrum: Arc<OnceLock<Spectrum>>,
    labels: Option<Arc<Vec<u32>>>,
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("dim", &self.dim())
            .field("matrix", &self.matrix)
            .finish()
    }
}

impl HermitianOperator {
    /// Validates hermiticity at the default relative tolerance.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITICITY_TOL)
    }

    /// Validates `max|A_ij - conj(A_ji)| <= tol * max|A_ij|` and stores the
    /// exactly Hermitian part.
    pub fn with_tolerance(mut matrix: DMatrix<C64>, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(validation(format!(
                "matrix is not square: {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(validation("matrix has dimension 0"));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(validation("matrix has non-finite entries"));
        }
        let scale = matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let d = matrix.nrows();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if worst > tol * scale {
            return Err(validation(format!(
                "matrix is not Hermitian: asymmetry {worst:e} exceeds {:e}",
                tol * scale
            )));
        }
        symmetrize(&mut matrix);
        Ok(Self::from_hermitian_unchecked(matrix))
    }

    pub(crate) fn from_hermitian_unchecked(matrix: DMatrix<C64>) -> Self {
        HermitianOperator { matrix, spectrum: Arc::new(OnceLock::new()), labels: None }
    }

    /// Builds `V diag(values) V†` from a known eigendecomposition. The
    /// columns of `vectors` must be orthonormal; this is not re-checked.
    pub fn from_spectrum(values: Vec<f64>, vectors: DMatrix<C64>) -> Self {
        let spectrum = Spectrum::sorted(values, vectors);
        let matrix = reconstruct(&spectrum.values, &spectrum.vectors);
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        HermitianOperator { matrix, spectrum: Arc::new(cell), labels: None }
    }

    /// Real diagonal operator `diag(values)`.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let matrix = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let spectrum = Spectrum::sorted(values.to_vec(), DMatrix::identity(d, d));
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        HermitianOperator { matrix, spectrum: Arc::new(cell), labels: None }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::diagonal(&vec![0.0; dim])
    }

    /// Builds a Hermitian operator from real row-major entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(validation(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| C64::new(entries[i * dim + j], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Cached spectral decomposition, eigenvalues ascending.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| eigen(&self.matrix))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dimension is positive")
    }

    /// Operator norm (largest eigenvalue magnitude).
    pub fn norm(&self) -> f64 {
        self.spectrum().max_abs()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Symbolic cluster labels aligned with the sorted spectrum, when known.
    pub fn cluster_labels(&self) -> Option<&[u32]> {
        self.labels.as_deref().map(|v| v.as_slice())
    }

    /// Applies a scalar function to the spectrum, keeping the eigenvectors.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let sp = self.spectrum();
        let values: Vec<f64> = sp.values.iter().map(|&x| f(x)).collect();
        HermitianOperator::from_spectrum(values, sp.vectors.clone())
    }

    pub fn scale(&self, c: f64) -> HermitianOperator {
        let matrix = self.matrix.map(|z| z * c);
        let out = HermitianOperator::from_hermitian_unchecked(matrix);
        if let Some(sp) = self.spectrum.get() {
            let values = sp.values.iter().map(|x| x * c).collect();
            let _ = out.spectrum.set(Spectrum::sorted(values, sp.vectors.clone()));
        }
        out
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.same_dim(other)?;
        Ok(HermitianOperator::from_hermitian_unchecked(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.same_dim(other)?;
        Ok(HermitianOperator::from_hermitian_unchecked(&self.matrix - &other.matrix))
    }

    /// `self - c * other`.
    pub fn sub_scaled(&self, c: f64, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.same_dim(other)?;
        let m = &self.matrix - other.matrix.map(|z| z * c);
        Ok(HermitianOperator::from_hermitian_unchecked(m))
    }

    fn same_dim(&self, other: &HermitianOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(validation(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Kronecker product `self ⊗ other`; the spectrum is assembled from the
    /// factors' spectra.
    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        let (a, b) = (self.spectrum(), other.spectrum());
        let mut values = Vec::with_capacity(a.values.len() * b.values.len());
        for &x in &a.values {
            for &y in &b.values {
                values.push(x * y);
            }
        }
        let vectors = a.vectors.kronecker(&b.vectors);
        let spectrum = Spectrum::sorted(values, vectors);
        let matrix = self.matrix.kronecker(&other.matrix);
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        HermitianOperator { matrix, spectrum: Arc::new(cell), labels: None }
    }

    /// Relative support cutoff `SUPPORT_TOL * λ_max(|.|)`.
    pub fn support_cutoff(&self) -> f64 {
        SUPPORT_TOL * self.norm()
    }

    /// Checks positive semidefiniteness up to the relative support tolerance.
    pub fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -self.support_cutoff() {
            return Err(domain(format!(
                "operator is not positive semidefinite: eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// Number of eigenvalues above the support cutoff.
    pub fn rank(&self) -> usize {
        let cut = self.support_cutoff();
        self.eigenvalues().iter().filter(|&&x| x > cut).count()
    }

    /// Spectral clusters (indices into the sorted spectrum), ordered by value.
    ///
    /// With symbolic labels, eigenvalues are grouped by label first and only
    /// groups whose values coincide within `cluster_tol` are merged.
    /// Otherwise single-linkage on the sorted eigenvalues with relative gap
    /// `cluster_tol` is used.
    pub fn clusters(&self, cluster_tol: f64) -> Vec<Vec<usize>> {
        let values = self.eigenvalues();
        let scale = self.norm();
        let gap = cluster_tol * scale;
        let groups: Vec<Vec<usize>> = match self.cluster_labels() {
            Some(labels) => {
                let mut by_label: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
                for (i, &l) in labels.iter().enumerate() {
                    by_label.entry(l).or_default().push(i);
                }
                let mut groups: Vec<Vec<usize>> = by_label.into_values().collect();
                groups.sort_by(|a, b| values[a[0]].total_cmp(&values[b[0]]));
                groups
            }
            None => (0..values.len()).map(|i| vec![i]).collect(),
        };
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut last_value = f64::NEG_INFINITY;
        for g in groups {
            let v = values[g[0]];
            match out.last_mut() {
                Some(cur) if v - last_value <= gap => cur.extend(g),
                _ => out.push(g),
            }
            last_value = values[*out.last().unwrap().last().unwrap()];
        }
        out
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        HermitianOperator::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Wire format `{dim, re, im}` with row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl From<&HermitianOperator> for MatrixJson {
    fn from(op: &HermitianOperator) -> Self {
        let d = op.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(op.matrix[(i, j)].re);
                im.push(op.matrix[(i, j)].im);
            }
        }
        MatrixJson { dim: d, re, im }
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let n = m.dim * m.dim;
        if m.re.len() != n || !(m.im.is_empty() || m.im.len() == n) {
            return Err(validation(format!(
                "matrix of dimension {} needs {n} entries in re and im",
                m.dim
            )));
        }
        let matrix = DMatrix::from_fn(m.dim, m.dim, |i, j| {
            let k = i * m.dim + j;
            C64::new(m.re[k], m.im.get(k).copied().unwrap_or(0.0))
        });
        HermitianOperator::new(matrix)
    }
}

/// Spectral decomposition `op = V diag(λ) V†`, eigenvalues ascending.
pub fn spectral(op: &HermitianOperator) -> (Vec<f64>, DMatrix<C64>) {
    let sp = op.spectrum();
    (sp.values.clone(), sp.vectors.clone())
}

/// `op^t` on the support of `op`; eigenvalues below the cutoff map to zero
/// for every `t`, so `t = 0` yields the support projection.
pub fn power_on_support(op: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
    op.check_psd()?;
    let cut = op.support_cutoff();
    Ok(op.map_spectrum(|x| if x > cut { x.powf(t) } else { 0.0 }))
}

/// `log op` on the support, zero on the kernel.
pub fn log_on_support(op: &HermitianOperator) -> Result<HermitianOperator> {
    op.check_psd()?;
    let cut = op.support_cutoff();
    Ok(op.map_spectrum(|x| if x > cut { x.ln() } else { 0.0 }))
}

/// Projection onto the support of a PSD operator.
pub fn support_projection(op: &HermitianOperator) -> Result<HermitianOperator> {
    power_on_support(op, 0.0)
}

/// `Tr X₊`, the sum of the positive eigenvalues.
pub fn positive_part_trace(op: &HermitianOperator) -> f64 {
    op.eigenvalues().iter().filter(|&&x| x > 0.0).sum()
}

/// One diagonal block `P_i X P_i` of a pinching, expressed in the
/// eigenbasis of the pinching operator.
#[derive(Debug, Clone)]
pub struct PinchedBlock {
    /// Representative eigenvalue of the pinching operator on this block.
    pub sigma_value: f64,
    /// Indices into the sorted spectrum of the pinching operator.
    pub indices: Vec<usize>,
    /// The block of `V† X V` restricted to `indices`.
    pub block: DMatrix<C64>,
}

/// Splits `x` into the diagonal blocks of the spectral clusters of `sigma`.
pub fn pinched_blocks(
    x: &HermitianOperator,
    sigma: &HermitianOperator,
    cluster_tol: f64,
) -> Result<Vec<PinchedBlock>> {
    x.same_dim(sigma)?;
    let sp = sigma.spectrum();
    let v = &sp.vectors;
    let rotated = v.adjoint() * x.matrix() * v;
    Ok(sigma
        .clusters(cluster_tol)
        .into_iter()
        .map(|indices| {
            let k = indices.len();
            let block = DMatrix::from_fn(k, k, |i, j| rotated[(indices[i], indices[j])]);
            let sigma_value = indices.iter().map(|&i| sp.values[i]).sum::<f64>() / k as f64;
            PinchedBlock { sigma_value, indices, block }
        })
        .collect())
}

/// The pinching `Σ_i P_i x P_i` over the spectral projections of `sigma`.
pub fn pinch(
    x: &HermitianOperator,
    sigma: &HermitianOperator,
    cluster_tol: f64,
) -> Result<HermitianOperator> {
    let blocks = pinched_blocks(x, sigma, cluster_tol)?;
    let d = x.dim();
    let mut inner = DMatrix::<C64>::zeros(d, d);
    for b in &blocks {
        for (i, &gi) in b.indices.iter().enumerate() {
            for (j, &gj) in b.indices.iter().enumerate() {
                inner[(gi, gj)] = b.block[(i, j)];
            }
        }
    }
    let v = &sigma.spectrum().vectors;
    let mut out = v * inner * v.adjoint();
    symmetrize(&mut out);
    Ok(HermitianOperator::from_hermitian_unchecked(out))
}

/// `v(σ)`, the number of distinct eigenvalues under `cluster_tol`.
pub fn distinct_eigenvalue_count(sigma: &HermitianOperator, cluster_tol: f64) -> usize {
    sigma.clusters(cluster_tol).len()
}

/// Default dominance slack: `1e-9` times the larger operator norm.
pub fn default_slack(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    1e-9 * a.norm().max(b.norm())
}

/// True iff `λ_min(a - b) >= -slack`.
pub fn psd_dominates(a: &HermitianOperator, b: &HermitianOperator, slack: f64) -> Result<bool> {
    Ok(a.sub(b)?.min_eigenvalue() >= -slack)
}

/// Exact Kronecker power `op^{⊗n}`.
///
/// The spectrum is assembled from products of the base eigenvalues and
/// every eigenvalue carries the multiset of base clusters it came from, so
/// later clustering cannot split or merge exact degeneracies by rounding.
pub fn tensor_power(op: &HermitianOperator, n: usize, dim_cap: usize) -> Result<HermitianOperator> {
    if n == 0 {
        return Err(validation("tensor power exponent must be positive"));
    }
    let d = op.dim();
    let required = d
        .checked_pow(n as u32)
        .filter(|&r| r <= dim_cap)
        .ok_or(Error::Resource { required: d.saturating_pow(n as u32), cap: dim_cap })?;

    let base = op.spectrum();
    let base_clusters = op.clusters(CLUSTER_TOL);
    let mut cluster_of = vec![0usize; d];
    for (c, idx) in base_clusters.iter().enumerate() {
        for &i in idx {
            cluster_of[i] = c;
        }
    }

    let mut matrix = op.matrix.clone();
    let mut vectors = base.vectors.clone();
    for _ in 1..n {
        matrix = matrix.kronecker(&op.matrix);
        vectors = vectors.kronecker(&base.vectors);
    }

    // Enumerate multi-indices in Kronecker (lexicographic) order.
    let mut values = Vec::with_capacity(required);
    let mut label_ids: BTreeMap<Vec<u16>, u32> = BTreeMap::new();
    let mut labels = Vec::with_capacity(required);
    let mut digits = vec![0usize; n];
    for _ in 0..required {
        let mut value = 1.0;
        let mut counts = vec![0u16; base_clusters.len()];
        for &i in &digits {
            value *= base.values[i];
            counts[cluster_of[i]] += 1;
        }
        values.push(value);
        let next = label_ids.len() as u32;
        labels.push(*label_ids.entry(counts).or_insert(next));
        for pos in (0..n).rev() {
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
        }
    }

    let mut order: Vec<usize> = (0..required).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut sorted_vectors = DMatrix::zeros(required, required);
    for (new, &old) in order.iter().enumerate() {
        sorted_vectors.set_column(new, &vectors.column(old));
    }
    let spectrum = Spectrum {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: sorted_vectors,
    };
    let labels: Vec<u32> = order.iter().map(|&i| labels[i]).collect();
    let cell = OnceLock::new();
    let _ = cell.set(spectrum);
    Ok(HermitianOperator { matrix, spectrum: Arc::new(cell), labels: Some(Arc::new(labels)) })
}

/// `Tr(A B)` for square matrices of equal size.
pub fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Frobenius norm of the commutator `[a, b]`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    (ab - ba).norm()
}

/// A null/alternative pair of density operators with `supp ρ ⊆ supp σ`.
#[derive(Debug, Clone)]
pub struct StatePair {
    rho: HermitianOperator,
    sigma: HermitianOperator,
    support_margin: f64,
}

/// Support margins below this value are flagged in reports.
pub const SUPPORT_MARGIN_WARNING: f64 = 1e-6;

impl StatePair {
    pub fn new(rho: HermitianOperator, sigma: HermitianOperator) -> Result<Self> {
        rho.same_dim(&sigma)?;
        for (name, op) in [("rho", &rho), ("sigma", &sigma)] {
            op.check_psd().map_err(|e| validation(format!("{name}: {e}")))?;
            let tr = op.trace();
            if (tr - 1.0).abs() > 1e-10 {
                return Err(validation(format!("{name} has trace {tr}, expected 1")));
            }
        }
        if !support_contained(&rho, &sigma, 1e-8)? {
            return Err(validation("support condition supp rho ⊆ supp sigma fails"));
        }
        let cut = sigma.support_cutoff();
        let smallest = sigma
            .eigenvalues()
            .iter()
            .copied()
            .filter(|&x| x > cut)
            .fold(f64::INFINITY, f64::min);
        let support_margin = smallest / sigma.max_eigenvalue();
        Ok(StatePair { rho, sigma, support_margin })
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn sigma(&self) -> &HermitianOperator {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Smallest nonzero eigenvalue of σ relative to its largest.
    pub fn support_margin(&self) -> f64 {
        self.support_margin
    }

    /// True when the support decision sits close to the cutoff.
    pub fn support_flagged(&self) -> bool {
        self.support_margin < SUPPORT_MARGIN_WARNING
    }
}

/// Checks that every above-cutoff eigenvector of `rho` lies in the support of
/// `sigma` up to `tol` in norm.
pub fn support_contained(rho: &HermitianOperator, sigma: &HermitianOperator, tol: f64) -> Result<bool> {
    rho.same_dim(sigma)?;
    let cut_s = sigma.support_cutoff();
    let sp_s = sigma.spectrum();
    let kernel: Vec<usize> = (0..sigma.dim()).filter(|&i| sp_s.values[i] <= cut_s).collect();
    if kernel.is_empty() {
        return Ok(true);
    }
    let cut_r = rho.support_cutoff();
    let sp_r = rho.spectrum();
    for (j, &lam) in sp_r.values.iter().enumerate() {
        if lam <= cut_r {
            continue;
        }
        let v = sp_r.vectors.column(j);
        let leak: f64 = kernel
            .iter()
            .map(|&k| sp_s.vectors.column(k).dotc(&v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if leak > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A test `0 <= T <= I`.
#[derive(Debug, Clone)]
pub struct Test {
    op: HermitianOperator,
}

impl Test {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let (lo, hi) = (op.min_eigenvalue(), op.max_eigenvalue());
        if lo < -TEST_SLACK || hi > 1.0 + TEST_SLACK {
            return Err(validation(format!("test eigenvalues [{lo}, {hi}] leave [0, 1]")));
        }
        Ok(Test { op })
    }

    pub(crate) fn from_projection(op: HermitianOperator) -> Self {
        Test { op }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn identity(dim: usize) -> Self {
        Test { op: HermitianOperator::identity(dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Test { op: HermitianOperator::zeros(dim) }
    }
}
