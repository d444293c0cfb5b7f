//! Dense block-matrix algebras `⊕_x M_{m_x}`, their elements and states.
//!
//! Everything here is plain complex linear algebra on small dense matrices:
//! Hermitian eigendecompositions, spectral logarithms, support projections
//! and partial traces over the left tensor factor.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Block sizes `[m_1, …, m_s]` of `⊕_x M_{m_x}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraSpec {
    blocks: Vec<usize>,
}

impl AlgebraSpec {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if let Some(x) = blocks.iter().position(|&m| m == 0) {
            return Err(Error::InvalidAlgebra(format!("block {x} has size 0")));
        }
        Ok(Self { blocks })
    }

    /// The single-block algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// The commutative algebra `C^k`.
    pub fn commutative(k: usize) -> Result<Self> {
        Self::new(vec![1; k])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self, x: usize) -> usize {
        self.blocks[x]
    }

    /// Vector-space dimension `Σ_x m_x²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|m| m * m).sum()
    }

    /// Side length of the block-diagonal embedding, `Σ_x m_x`.
    pub fn side(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Direct sum `self ⊕ other`, blocks of `self` first.
    pub fn direct_sum(&self, other: &AlgebraSpec) -> AlgebraSpec {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        AlgebraSpec { blocks }
    }

    pub(crate) fn ensure_same(&self, other: &AlgebraSpec) -> Result<()> {
        if self != other {
            return Err(Error::AlgebraMismatch {
                expected: self.blocks.clone(),
                found: other.blocks.clone(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_blocks(&self, blocks: &[CMat], context: &'static str) -> Result<()> {
        if blocks.len() != self.blocks.len() {
            return Err(Error::Shape {
                context,
                expected: (self.blocks.len(), 1),
                found: (blocks.len(), 1),
            });
        }
        for (b, &m) in blocks.iter().zip(&self.blocks) {
            if b.shape() != (m, m) {
                return Err(Error::Shape {
                    context,
                    expected: (m, m),
                    found: b.shape(),
                });
            }
        }
        Ok(())
    }

    /// All matrix units `E^{(x)}_{ij}` as `(x, i, j)`, block-major then row-major.
    pub fn matrix_unit_indices(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(x, &m)| (0..m).flat_map(move |i| (0..m).map(move |j| (x, i, j))))
    }
}

/// An element `⊕_x A_x` of a block algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    spec: AlgebraSpec,
    blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn new(spec: AlgebraSpec, blocks: Vec<CMat>) -> Result<Self> {
        spec.check_blocks(&blocks, "algebra element")?;
        Ok(Self { spec, blocks })
    }

    pub fn zero(spec: &AlgebraSpec) -> Self {
        let blocks = spec.blocks.iter().map(|&m| CMat::zeros(m, m)).collect();
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    pub fn identity(spec: &AlgebraSpec) -> Self {
        let blocks = spec.blocks.iter().map(|&m| CMat::identity(m, m)).collect();
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    /// The matrix unit `E_{ij}` placed in block `x`.
    pub fn matrix_unit(spec: &AlgebraSpec, x: usize, i: usize, j: usize) -> Self {
        let mut e = Self::zero(spec);
        e.blocks[x][(i, j)] = C64::new(1.0, 0.0);
        e
    }

    /// All matrix units of the algebra, in [`AlgebraSpec::matrix_unit_indices`] order.
    pub fn matrix_units(spec: &AlgebraSpec) -> Vec<Self> {
        spec.matrix_unit_indices()
            .map(|(x, i, j)| Self::matrix_unit(spec, x, i, j))
            .collect()
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, x: usize) -> &CMat {
        &self.blocks[x]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.spec.ensure_same(&other.spec)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    pub fn adjoint(&self) -> AlgebraElement {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.spec.ensure_same(&other.spec)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    /// Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius distance; `f64::INFINITY` on algebra mismatch.
    pub fn distance(&self, other: &AlgebraElement) -> f64 {
        self.sub(other).map(|d| d.norm()).unwrap_or(f64::INFINITY)
    }

    /// Column-major vec of each block, concatenated in block order.
    pub fn to_vector(&self) -> Vec<C64> {
        self.blocks
            .iter()
            .flat_map(|b| b.iter().copied())
            .collect()
    }

    pub fn from_vector(spec: &AlgebraSpec, v: &[C64]) -> Result<Self> {
        if v.len() != spec.dim() {
            return Err(Error::Shape {
                context: "vectorized element",
                expected: (spec.dim(), 1),
                found: (v.len(), 1),
            });
        }
        let mut offset = 0;
        let blocks = spec
            .blocks
            .iter()
            .map(|&m| {
                let b = CMat::from_column_slice(m, m, &v[offset..offset + m * m]);
                offset += m * m;
                b
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            blocks,
        })
    }
}

/// A state stored as unnormalized block densities `D_x = p_x ρ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    spec: AlgebraSpec,
    densities: Vec<CMat>,
}

impl State {
    /// Builds a state without numeric validation; see [`State::validate`].
    pub fn new(spec: AlgebraSpec, densities: Vec<CMat>) -> Result<Self> {
        spec.check_blocks(&densities, "state densities")?;
        Ok(Self { spec, densities })
    }

    /// The normalized trace `tr(·)/Σ_x m_x` restricted to each block.
    pub fn maximally_mixed(spec: &AlgebraSpec) -> Self {
        let side = spec.side() as f64;
        let densities = spec
            .blocks
            .iter()
            .map(|&m| CMat::identity(m, m).scale(1.0 / side))
            .collect();
        Self {
            spec: spec.clone(),
            densities,
        }
    }

    /// A state on a commutative algebra `C^k` from a probability vector.
    pub fn classical(probabilities: &[f64]) -> Result<Self> {
        let spec = AlgebraSpec::commutative(probabilities.len())?;
        let densities = probabilities
            .iter()
            .map(|&p| CMat::from_element(1, 1, C64::new(p, 0.0)))
            .collect();
        Ok(Self { spec, densities })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn densities(&self) -> &[CMat] {
        &self.densities
    }

    pub fn density(&self, x: usize) -> &CMat {
        &self.densities[x]
    }

    pub fn into_densities(self) -> Vec<CMat> {
        self.densities
    }

    /// Block weights `p_x = tr(D_x)`.
    pub fn weights(&self) -> Vec<f64> {
        self.densities.iter().map(|d| d.trace().re).collect()
    }

    /// Normalized block density `ρ_x`, defined only when `p_x > atol`.
    pub fn normalized_block(&self, x: usize, atol: f64) -> Option<CMat> {
        let p = self.densities[x].trace().re;
        (p > atol).then(|| self.densities[x].unscale(p))
    }

    /// `ω(A) = Σ_x tr(D_x A_x)`.
    pub fn evaluate(&self, a: &AlgebraElement) -> Result<C64> {
        self.spec.ensure_same(&a.spec)?;
        Ok(self
            .densities
            .iter()
            .zip(&a.blocks)
            .map(|(d, b)| (d * b).trace())
            .sum())
    }

    /// Frobenius distance between the density lists.
    pub fn distance(&self, other: &State) -> f64 {
        if self.spec != other.spec {
            return f64::INFINITY;
        }
        self.densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest per-block Frobenius distance.
    pub fn max_block_distance(&self, other: &State) -> f64 {
        if self.spec != other.spec {
            return f64::INFINITY;
        }
        self.densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Trace distance `½ Σ_x ‖D_x − D′_x‖_1`.
    pub fn trace_distance(&self, other: &State) -> f64 {
        if self.spec != other.spec {
            return f64::INFINITY;
        }
        0.5 * self
            .densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| {
                let diff = a - b;
                let herm = hermitian_part(&diff);
                herm.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
            })
            .sum::<f64>()
    }

    /// Largest eigenvalue over all blocks.
    pub fn max_eigenvalue(&self) -> f64 {
        self.densities
            .iter()
            .map(|d| {
                hermitian_part(d)
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Checks Hermiticity, positivity and normalization at tolerance `atol`.
    pub fn validate(&self, atol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut faithful = true;
        let mut total = 0.0;
        for (x, d) in self.densities.iter().enumerate() {
            let asym = max_abs(&(d - d.adjoint()));
            if asym > atol {
                report.push(Violation::NotHermitian {
                    block: x,
                    residual: asym,
                });
            }
            let evals = hermitian_part(d).symmetric_eigenvalues();
            let min = evals.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -atol {
                report.push(Violation::Negative {
                    block: x,
                    min_eigenvalue: min,
                });
            }
            if min <= atol {
                faithful = false;
            }
            total += d.trace().re;
        }
        if (total - 1.0).abs() > atol {
            report.push(Violation::Normalization {
                residual: total - 1.0,
            });
        }
        report.faithful = Some(faithful && report.is_valid());
        report
    }

    pub fn is_faithful(&self, atol: f64) -> bool {
        self.validate(atol).faithful == Some(true)
    }
}

/// One numeric violation found by a validator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotHermitian { block: usize, residual: f64 },
    Negative { block: usize, min_eigenvalue: f64 },
    Normalization { residual: f64 },
    ChoiNotHermitian { y: usize, x: usize, residual: f64 },
    NotCompletelyPositive { y: usize, x: usize, min_eigenvalue: f64 },
    NotUnital { y: usize, residual: f64 },
    StateMismatch { residual: f64 },
    NotLeftInverse { residual: f64 },
    Source(Box<Violation>),
    Target(Box<Violation>),
    Hypothesis(Box<Violation>),
    Structure { message: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { block, residual } => {
                write!(f, "block {block} not Hermitian (residual {residual:e})")
            }
            Violation::Negative {
                block,
                min_eigenvalue,
            } => write!(f, "block {block} has negative eigenvalue {min_eigenvalue:e}"),
            Violation::Normalization { residual } => {
                write!(f, "total trace deviates from 1 by {residual:e}")
            }
            Violation::ChoiNotHermitian { y, x, residual } => {
                write!(f, "Choi matrix ({y},{x}) not Hermitian (residual {residual:e})")
            }
            Violation::NotCompletelyPositive { y, x, min_eigenvalue } => write!(
                f,
                "component ({y},{x}) not completely positive (Choi min eigenvalue {min_eigenvalue:e})"
            ),
            Violation::NotUnital { y, residual } => {
                write!(f, "not unital on block {y} (residual {residual:e})")
            }
            Violation::StateMismatch { residual } => {
                write!(f, "ω∘F differs from ξ (trace distance {residual:e})")
            }
            Violation::NotLeftInverse { residual } => {
                write!(f, "Q∘F differs from the identity (residual {residual:e})")
            }
            Violation::Source(v) => write!(f, "source state: {v}"),
            Violation::Target(v) => write!(f, "target state: {v}"),
            Violation::Hypothesis(v) => write!(f, "hypothesis: {v}"),
            Violation::Structure { message } => write!(f, "{message}"),
        }
    }
}

/// Result of a numeric validation. Empty `violations` means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Set by state validation: all eigenvalues exceed the tolerance.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub faithful: Option<bool>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub(crate) fn absorb(&mut self, other: ValidationReport, wrap: fn(Box<Violation>) -> Violation) {
        self.violations
            .extend(other.violations.into_iter().map(|v| wrap(Box::new(v))));
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: CMat,
}

impl HermitianEigen {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMat {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let s = f(l);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * v.adjoint()
    }
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn ensure_square(m: &CMat, context: &'static str) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::Shape {
            context,
            expected: (r, r),
            found: (r, c),
        });
    }
    Ok(r)
}

fn ensure_hermitian(m: &CMat, context: &'static str) -> Result<()> {
    ensure_square(m, context)?;
    let scale = max_abs(m).max(1.0);
    let residual = max_abs(&(m - m.adjoint()));
    if residual > 1e-8 * scale {
        return Err(Error::NotHermitian(residual));
    }
    Ok(())
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat) -> Result<HermitianEigen> {
    ensure_hermitian(m, "hermitian eigendecomposition")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: CMat::zeros(0, 0),
        });
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Spectral natural logarithm on the support of `m`.
///
/// Eigenvalues at or below `cutoff · λ_max` are mapped to 0, so that
/// `λ ln λ` vanishes off the support.
pub fn hermitian_log(m: &CMat, cutoff: f64) -> Result<CMat> {
    let eig = hermitian_eigen(m)?;
    let threshold = cutoff * eig.max_eigenvalue().max(0.0);
    Ok(eig.map_spectrum(|l| if l > threshold && l > 0.0 { l.ln() } else { 0.0 }))
}

/// Spectral exponential of a Hermitian matrix.
pub fn hermitian_exp(h: &CMat) -> Result<CMat> {
    Ok(hermitian_eigen(h)?.map_spectrum(f64::exp))
}

/// Projection onto eigenvectors with eigenvalue above `cutoff · λ_max`.
pub fn support_projection(m: &CMat, cutoff: f64) -> Result<CMat> {
    let eig = hermitian_eigen(m)?;
    let threshold = cutoff * eig.max_eigenvalue().max(0.0);
    Ok(projection_above(&eig, threshold))
}

pub(crate) fn projection_above(eig: &HermitianEigen, threshold: f64) -> CMat {
    eig.map_spectrum(|l| if l > threshold && l > 0.0 { 1.0 } else { 0.0 })
}

/// `tr_A` on `C^a ⊗ C^b`, the left factor traced out.
pub fn partial_trace_left(t: &CMat, a: usize, b: usize) -> Result<CMat> {
    let n = a * b;
    if t.shape() != (n, n) {
        return Err(Error::Shape {
            context: "partial trace",
            expected: (n, n),
            found: t.shape(),
        });
    }
    let mut out = CMat::zeros(b, b);
    for k in 0..a {
        out += t.view((k * b, k * b), (b, b));
    }
    Ok(out)
}

/// `tr_B` on `C^a ⊗ C^b`, the right factor traced out.
pub fn partial_trace_right(t: &CMat, a: usize, b: usize) -> Result<CMat> {
    let n = a * b;
    if t.shape() != (n, n) {
        return Err(Error::Shape {
            context: "partial trace",
            expected: (n, n),
            found: t.shape(),
        });
    }
    Ok(CMat::from_fn(a, a, |i, k| {
        (0..b).map(|j| t[(i * b + j, k * b + j)]).sum()
    }))
}

/// Support projections of every block, thresholded against the state's
/// largest eigenvalue.
fn state_supports(s: &State, cutoff: f64) -> Result<Vec<CMat>> {
    let eigs = s
        .densities()
        .iter()
        .map(hermitian_eigen)
        .collect::<Result<Vec<_>>>()?;
    let scale = eigs
        .iter()
        .map(HermitianEigen::max_eigenvalue)
        .fold(0.0, f64::max);
    Ok(eigs
        .iter()
        .map(|e| projection_above(e, cutoff * scale))
        .collect())
}

/// `ω ⪯ ω′`: blockwise `supp(D_x) ≤ supp(D′_x)`.
pub fn absolutely_continuous(omega: &State, omega_prime: &State, cutoff: f64) -> Result<bool> {
    omega.spec().ensure_same(omega_prime.spec())?;
    let p = state_supports(omega, cutoff)?;
    let q = state_supports(omega_prime, cutoff)?;
    let tol = cutoff.max(1e-12);
    Ok(p.iter().zip(&q).all(|(p, q)| {
        let comp = CMat::identity(q.nrows(), q.ncols()) - q;
        let leak = &comp * p * &comp;
        operator_norm_psd(&leak) <= tol
    }))
}

fn operator_norm_psd(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max)
}

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
