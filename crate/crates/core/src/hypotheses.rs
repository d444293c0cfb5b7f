//! Objects `(A, ω)`, morphisms `(F, Q)`, rectification to standard form and
//! non-commutative disintegrations.
//!
//! A hypothesis `Q` for `F` in standard form is of disintegration type when
//! there are positive matrices `α_yx ∈ M_{c[y][x]}` with
//!
//! ```text
//! Q_yx(A_x) = tr_{M_c}((α_yx ⊗ 1_{n_y}) A_{x;yy}),    Σ_x tr(α_yx) = 1,
//! ```
//!
//! and then `ξ∘Q` has block densities `⊞_y α_yx ⊗ q_y σ_y`.

use crate::algebra::{
    hermitian_eigen, partial_trace_left, AlgebraElement, AlgebraSpec, CMat, State,
    ValidationReport, Violation,
};
use crate::error::{Error, Result};
use crate::maps::{ad_cpu, CpuMap, StarHom};

/// Object equality tolerance for composition (Frobenius, per block).
pub const OBJECT_MATCH_TOL: f64 = 1e-8;

/// A non-commutative probability space `(A, ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NcObject {
    state: State,
}

impl NcObject {
    /// Wraps a state after checking it at tolerance `atol`.
    pub fn new(state: State, atol: f64) -> Result<Self> {
        let report = state.validate(atol);
        if !report.is_valid() {
            return Err(Error::InvalidState(report));
        }
        Ok(Self { state })
    }

    /// Wraps a state without numeric validation.
    pub fn unchecked(state: State) -> Self {
        Self { state }
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        self.state.spec()
    }

    pub fn state(&self) -> &State {
        &self.state
    }
}

/// A morphism `(F, Q): (B, ξ) → (A, ω)` of non-commutative probability spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct NcMorphism {
    source: NcObject,
    target: NcObject,
    hom: StarHom,
    hypothesis: CpuMap,
}

impl NcMorphism {
    /// Checks that all shapes line up. Use [`NcMorphism::validate`] for the axioms.
    pub fn new(source: NcObject, target: NcObject, hom: StarHom, hypothesis: CpuMap) -> Result<Self> {
        source.algebra().ensure_same(hom.source())?;
        target.algebra().ensure_same(hom.target())?;
        target.algebra().ensure_same(hypothesis.source())?;
        source.algebra().ensure_same(hypothesis.target())?;
        Ok(Self {
            source,
            target,
            hom,
            hypothesis,
        })
    }

    pub fn identity(object: &NcObject) -> Self {
        Self {
            source: object.clone(),
            target: object.clone(),
            hom: StarHom::identity(object.algebra()),
            hypothesis: CpuMap::identity(object.algebra()),
        }
    }

    pub fn source(&self) -> &NcObject {
        &self.source
    }

    pub fn target(&self) -> &NcObject {
        &self.target
    }

    pub fn hom(&self) -> &StarHom {
        &self.hom
    }

    pub fn hypothesis(&self) -> &CpuMap {
        &self.hypothesis
    }

    /// `ξ∘Q`, the state on the target algebra predicted by the hypothesis.
    pub fn predicted_state(&self) -> Result<State> {
        self.hypothesis.pullback_state(self.source.state())
    }

    /// Largest `‖Q(F(E)) − E‖_F` over the matrix units of the source.
    pub fn left_inverse_residual(&self) -> f64 {
        AlgebraElement::matrix_units(self.source.algebra())
            .iter()
            .map(|e| {
                let image = self
                    .hom
                    .apply(e)
                    .and_then(|a| self.hypothesis.apply(&a))
                    .expect("shapes checked at construction");
                image.distance(e)
            })
            .fold(0.0, f64::max)
    }

    /// Both morphism axioms, the hypothesis, and both states.
    pub fn validate(&self, atol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        report.absorb(self.source.state.validate(atol), Violation::Source);
        report.absorb(self.target.state.validate(atol), Violation::Target);
        report.absorb(self.hypothesis.validate(atol), Violation::Hypothesis);
        let pushed = self
            .hom
            .pushforward(self.target.state())
            .expect("shapes checked at construction");
        let residual = pushed.trace_distance(self.source.state());
        if residual > atol {
            report.push(Violation::StateMismatch { residual });
        }
        let residual = self.left_inverse_residual();
        if residual > atol {
            report.push(Violation::NotLeftInverse { residual });
        }
        report.faithful = None;
        report
    }

    /// Frobenius distance between `ξ∘Q` and `ω`.
    pub fn optimality_residual(&self) -> f64 {
        self.predicted_state()
            .map(|s| s.distance(self.target.state()))
            .unwrap_or(f64::INFINITY)
    }

    /// `ξ∘Q = ω` within `atol`, with the residual.
    pub fn is_optimal(&self, atol: f64) -> (bool, f64) {
        let r = self.optimality_residual();
        (r <= atol, r)
    }
}

pub fn validate_morphism(m: &NcMorphism, atol: f64) -> ValidationReport {
    m.validate(atol)
}

pub fn is_optimal(m: &NcMorphism, atol: f64) -> (bool, f64) {
    m.is_optimal(atol)
}

/// `ω∘Ad_U`: densities `U_x† D_x U_x`.
pub(crate) fn conjugate_state(state: &State, u: &[CMat]) -> State {
    let densities = state
        .densities()
        .iter()
        .zip(u)
        .map(|(d, u)| u.adjoint() * d * u)
        .collect();
    State::new(state.spec().clone(), densities).expect("conjugation preserves shapes")
}

fn adjoints(u: &[CMat]) -> Vec<CMat> {
    u.iter().map(CMat::adjoint).collect()
}

/// A morphism moved to standard form, and the unitary `U` that did it.
#[derive(Debug, Clone)]
pub struct Rectification {
    /// Conjugators of the original `F`.
    pub u: Vec<CMat>,
    /// `(Ad_{U†}∘F, Q∘Ad_U): (B, ξ) → (A, ω∘Ad_U)`.
    pub morphism: NcMorphism,
}

/// `(Ad_{U†}∘F, Q∘Ad_U)` with `U` the stored conjugators of `F`.
pub fn rectify_morphism(m: &NcMorphism) -> Rectification {
    let u = m.hom.conjugators().to_vec();
    let hypothesis = m.hypothesis.compose(&ad_cpu(&u)).expect("same algebra");
    let target = NcObject::unchecked(conjugate_state(m.target.state(), &u));
    let morphism = NcMorphism {
        source: m.source.clone(),
        target,
        hom: m.hom.standardized(),
        hypothesis,
    };
    Rectification { u, morphism }
}

/// A composable pair with both members moved to standard form.
#[derive(Debug, Clone)]
pub struct PairRectification {
    /// Unitary on the outer target `A`.
    pub u: Vec<CMat>,
    /// Unitary on the middle algebra `B`.
    pub v: Vec<CMat>,
    /// `(Ad_{V†}∘G, R∘Ad_V): (C, ζ) → (B, ξ∘Ad_V)`.
    pub g: NcMorphism,
    /// `(Ad_{U†}∘F∘Ad_V, Ad_{V†}∘Q∘Ad_U): (B, ξ∘Ad_V) → (A, ω∘Ad_U)`.
    pub f: NcMorphism,
}

/// Simultaneous rectification of `g: (C, ζ) → (B, ξ)` and `f: (B, ξ) → (A, ω)`.
pub fn rectify_pair(g: &NcMorphism, f: &NcMorphism) -> Result<PairRectification> {
    g.target.algebra().ensure_same(f.source.algebra())?;
    let Rectification { u: v, morphism: g_std } = rectify_morphism(g);
    let ad_v = StarHom::new(
        f.source.algebra().clone(),
        f.source.algebra().clone(),
        StarHom::identity(f.source.algebra()).multiplicities().to_vec(),
        v.clone(),
        1e-8,
    )?;
    let moved = NcMorphism {
        source: NcObject::unchecked(conjugate_state(f.source.state(), &v)),
        target: f.target.clone(),
        hom: f.hom.compose(&ad_v)?,
        hypothesis: ad_cpu(&adjoints(&v)).compose(&f.hypothesis)?,
    };
    let Rectification { u, morphism: f_std } = rectify_morphism(&moved);
    Ok(PairRectification {
        u,
        v,
        g: g_std,
        f: f_std,
    })
}

/// `(F∘G, R∘Q): (C, ζ) → (A, ω)` for `g = (G, R)` and `f = (F, Q)`.
pub fn compose_morphisms(g: &NcMorphism, f: &NcMorphism) -> Result<NcMorphism> {
    g.target.algebra().ensure_same(f.source.algebra())?;
    let residual = g.target.state().max_block_distance(f.source.state());
    if residual > OBJECT_MATCH_TOL {
        return Err(Error::ObjectMismatch(residual));
    }
    Ok(NcMorphism {
        source: g.source.clone(),
        target: f.target.clone(),
        hom: f.hom.compose(&g.hom)?,
        hypothesis: g.hypothesis.compose(&f.hypothesis)?,
    })
}

/// The matrices `α_yx` of a disintegration, indexed `[y][x]`.
///
/// `α_yx` is `c[y][x] × c[y][x]`; it is `0 × 0` where `F` has no copy of
/// block `y` in block `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFamily {
    alphas: Vec<Vec<CMat>>,
    /// Source blocks whose weight `q_y` was below tolerance; their `α` is a
    /// uniform placeholder, not a recovered value.
    unconstrained: Vec<bool>,
}

impl AlphaFamily {
    /// Checks shapes against the multiplicities of `f`.
    pub fn new(f: &StarHom, alphas: Vec<Vec<CMat>>) -> Result<Self> {
        let ny = f.source().block_count();
        let nx = f.target().block_count();
        if alphas.len() != ny || alphas.iter().any(|row| row.len() != nx) {
            return Err(Error::Shape {
                context: "alpha family",
                expected: (ny, nx),
                found: (alphas.len(), alphas.first().map_or(0, Vec::len)),
            });
        }
        for (y, row) in alphas.iter().enumerate() {
            for (x, a) in row.iter().enumerate() {
                let c = f.multiplicity(y, x);
                if a.shape() != (c, c) {
                    return Err(Error::Shape {
                        context: "alpha matrix",
                        expected: (c, c),
                        found: a.shape(),
                    });
                }
            }
        }
        Ok(Self {
            alphas,
            unconstrained: vec![false; ny],
        })
    }

    /// `α_yx = 1_{c}/Σ_x c[y][x]`, the family of the trace-scaled conditional expectation.
    pub fn uniform(f: &StarHom) -> Self {
        let alphas = f
            .multiplicities()
            .iter()
            .map(|row| uniform_row(row))
            .collect();
        Self {
            alphas,
            unconstrained: vec![false; f.source().block_count()],
        }
    }

    pub fn get(&self, y: usize, x: usize) -> &CMat {
        &self.alphas[y][x]
    }

    pub fn grid(&self) -> &[Vec<CMat>] {
        &self.alphas
    }

    pub fn unconstrained(&self) -> &[bool] {
        &self.unconstrained
    }

    /// `Σ_x tr(α_yx) − 1` for each `y`.
    pub fn normalization_residuals(&self) -> Vec<f64> {
        self.alphas
            .iter()
            .map(|row| row.iter().map(|a| a.trace().re).sum::<f64>() - 1.0)
            .collect()
    }

    /// Normalization and positivity at tolerance `atol`.
    pub fn check(&self, atol: f64) -> Result<()> {
        for (y, r) in self.normalization_residuals().into_iter().enumerate() {
            if r.abs() > atol {
                return Err(Error::AlphaNormalization { y, trace: r + 1.0 });
            }
        }
        for (y, row) in self.alphas.iter().enumerate() {
            for (x, a) in row.iter().enumerate() {
                if a.nrows() == 0 {
                    continue;
                }
                let min = hermitian_eigen(a)?.min_eigenvalue();
                if min < -atol {
                    return Err(Error::AlphaNotPositive {
                        y,
                        x,
                        min_eigenvalue: min,
                    });
                }
            }
        }
        Ok(())
    }

    /// Largest entrywise Frobenius distance between two families.
    pub fn distance(&self, other: &AlphaFamily) -> f64 {
        self.alphas
            .iter()
            .flatten()
            .zip(other.alphas.iter().flatten())
            .map(|(a, b)| {
                if a.shape() == b.shape() {
                    (a - b).norm()
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

fn uniform_row(row: &[usize]) -> Vec<CMat> {
    let total: usize = row.iter().sum();
    row.iter()
        .map(|&c| CMat::identity(c, c).scale(1.0 / total.max(1) as f64))
        .collect()
}

/// `tr_{M_c}((α ⊗ 1_n) S)` for a `c·n` square segment `S`.
fn weighted_partial_trace(alpha: &CMat, seg: &CMat, n: usize) -> CMat {
    let c = alpha.nrows();
    let lifted = alpha.kronecker(&CMat::identity(n, n)) * seg;
    partial_trace_left(&lifted, c, n).expect("segment shape matches multiplicity")
}

/// The hypothesis `Q_yx(A_x) = tr_{M_c}((α_yx ⊗ 1) A_{x;yy})`, conjugated by
/// the conjugators of `f` when `f` is not in standard form.
pub fn hypothesis_from_alphas(f: &StarHom, alphas: &AlphaFamily) -> Result<CpuMap> {
    AlphaFamily::new(f, alphas.alphas.clone())?;
    let layout = f.layout();
    let q0 = CpuMap::from_components(f.target(), f.source(), |y, x, e| {
        let n = f.source().block_dim(y);
        if f.multiplicity(y, x) == 0 {
            return CMat::zeros(n, n);
        }
        let seg = layout.extract(e, x, y, y);
        weighted_partial_trace(&alphas.alphas[y][x], &seg, n)
    });
    if f.is_standard(0.0) {
        return Ok(q0);
    }
    // Q = Q0 ∘ Ad_{U†}
    q0.compose(&ad_cpu(&adjoints(f.conjugators())))
}

/// The state with block densities `U_x (⊞_y α_yx ⊗ q_y σ_y) U_x†`.
pub fn disintegration_state(f: &StarHom, xi: &State, alphas: &AlphaFamily) -> Result<State> {
    f.source().ensure_same(xi.spec())?;
    let densities = f
        .target()
        .blocks()
        .iter()
        .enumerate()
        .map(|(x, &m)| {
            let mut d = CMat::zeros(m, m);
            let mut off = 0;
            for (y, xi_y) in xi.densities().iter().enumerate() {
                let a = &alphas.alphas[y][x];
                if a.nrows() == 0 {
                    continue;
                }
                let block = a.kronecker(xi_y);
                let len = block.nrows();
                d.view_mut((off, off), (len, len)).copy_from(&block);
                off += len;
            }
            let u = &f.conjugators()[x];
            u * d * u.adjoint()
        })
        .collect();
    State::new(f.target().clone(), densities)
}

/// The optimal morphism `(B, ξ) → (A, ω)` with `ω` the disintegration state.
pub fn build_hypothesis_from_alphas(
    f: &StarHom,
    xi: &State,
    alphas: &AlphaFamily,
    atol: f64,
) -> Result<NcMorphism> {
    alphas.check(atol)?;
    let q = hypothesis_from_alphas(f, alphas)?;
    let omega = disintegration_state(f, xi, alphas)?;
    NcMorphism::new(
        NcObject::unchecked(xi.clone()),
        NcObject::unchecked(omega),
        f.clone(),
        q,
    )
}

/// Why a density does not split as `⊞_y α_yx ⊗ q_y σ_y`.
#[derive(Debug, Clone, PartialEq)]
pub enum Obstruction {
    /// Off-diagonal segments `A_{x;yy′}`, `y ≠ y′`, are not zero.
    Coherence { residual: f64 },
    /// A diagonal segment is not a tensor product with `q_y σ_y`.
    NotProduct { x: usize, y: usize, residual: f64 },
}

impl Obstruction {
    pub fn residual(&self) -> f64 {
        match self {
            Obstruction::Coherence { residual } | Obstruction::NotProduct { residual, .. } => {
                *residual
            }
        }
    }
}

impl std::fmt::Display for Obstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Obstruction::Coherence { residual } => {
                write!(f, "off-diagonal segments have norm {residual:e}")
            }
            Obstruction::NotProduct { x, y, residual } => write!(
                f,
                "segment ({y},{y}) of block {x} is not a product with q_y σ_y (relative residual {residual:e})"
            ),
        }
    }
}

/// Splits standard-coordinate densities `T_x` as `⊞_y α_yx ⊗ Ξ_y`.
///
/// `α[k,k′] = tr(S_{kk′} Ξ⁺)/tr(Ξ Ξ⁺)` for each diagonal segment `S`, then the
/// product residual `‖S − α ⊗ Ξ‖_F ≤ atol·‖S‖_F` is enforced.
fn factorize(
    f: &StarHom,
    densities: &[CMat],
    xi: &State,
    atol: f64,
) -> std::result::Result<AlphaFamily, Obstruction> {
    let layout = f.layout();
    let ny = f.source().block_count();
    let coherence: f64 = densities
        .iter()
        .enumerate()
        .map(|(x, d)| {
            let mut s = 0.0;
            for y in 0..ny {
                for y2 in 0..ny {
                    if y != y2 {
                        s += layout.extract(d, x, y, y2).norm_squared();
                    }
                }
            }
            s
        })
        .sum::<f64>()
        .sqrt();
    if coherence > atol {
        return Err(Obstruction::Coherence {
            residual: coherence,
        });
    }
    let weights = xi.weights();
    let mut alphas: Vec<Vec<CMat>> = Vec::with_capacity(ny);
    let mut unconstrained = vec![false; ny];
    for (y, row) in f.multiplicities().iter().enumerate() {
        if weights[y] <= atol {
            unconstrained[y] = true;
            alphas.push(uniform_row(row));
            continue;
        }
        let xi_y = xi.density(y);
        let n = xi_y.nrows();
        let eig = hermitian_eigen(xi_y).map_err(|_| Obstruction::NotProduct {
            x: 0,
            y,
            residual: f64::INFINITY,
        })?;
        let threshold = 1e-12 * eig.max_eigenvalue();
        let pinv = eig.map_spectrum(|l| if l > threshold { 1.0 / l } else { 0.0 });
        let rank = eig.eigenvalues.iter().filter(|&&l| l > threshold).count() as f64;
        let mut alpha_row = Vec::with_capacity(row.len());
        for (x, &c) in row.iter().enumerate() {
            let seg = layout.extract(&densities[x], x, y, y);
            let alpha = CMat::from_fn(c, c, |k, k2| {
                (seg.view((k * n, k2 * n), (n, n)) * &pinv).trace() / rank
            });
            if c > 0 {
                let residual = (&seg - alpha.kronecker(xi_y)).norm();
                let scale = seg.norm();
                if residual > atol * scale.max(atol) {
                    return Err(Obstruction::NotProduct {
                        x,
                        y,
                        residual: residual / scale.max(f64::MIN_POSITIVE),
                    });
                }
            }
            alpha_row.push(alpha);
        }
        alphas.push(alpha_row);
    }
    Ok(AlphaFamily {
        alphas,
        unconstrained,
    })
}

/// Recovers `α` from a standard-form morphism whose `ξ∘Q` splits as
/// `⊞_y α_yx ⊗ q_y σ_y`.
pub fn extract_alphas(m: &NcMorphism, atol: f64) -> Result<AlphaFamily> {
    let residual = m.hom.standard_form_residual();
    if residual > atol {
        return Err(Error::NotStandardForm(residual));
    }
    let predicted = m.predicted_state()?;
    let family = factorize(&m.hom, predicted.densities(), m.source.state(), atol)
        .map_err(|o| Error::Factorization(o.to_string()))?;
    for (y, r) in family.normalization_residuals().into_iter().enumerate() {
        if !family.unconstrained[y] && r.abs() > atol {
            return Err(Error::AlphaNormalization { y, trace: r + 1.0 });
        }
    }
    Ok(family)
}

/// Outcome of [`construct_optimal_hypothesis`].
#[derive(Debug, Clone)]
pub enum Disintegration {
    Optimal {
        morphism: NcMorphism,
        alphas: AlphaFamily,
    },
    NoDisintegration(Obstruction),
}

/// Builds the optimal hypothesis `(B, ω∘F) → (A, ω)` for `F` if `ω` admits one.
pub fn construct_optimal_hypothesis(f: &StarHom, omega: &State, atol: f64) -> Result<Disintegration> {
    f.target().ensure_same(omega.spec())?;
    let xi = f.pushforward(omega)?;
    let rotated = conjugate_state(omega, f.conjugators());
    let alphas = match factorize(f, rotated.densities(), &xi, atol) {
        Ok(a) => a,
        Err(o) => return Ok(Disintegration::NoDisintegration(o)),
    };
    let q = hypothesis_from_alphas(f, &alphas)?;
    let morphism = NcMorphism::new(
        NcObject::unchecked(xi),
        NcObject::unchecked(omega.clone()),
        f.clone(),
        q,
    )?;
    Ok(Disintegration::Optimal { morphism, alphas })
}
