//! Unital *-homomorphisms and completely positive unital maps.
//!
//! A [`StarHom`] `F: B → A` is stored already factored through its standard
//! form: integer multiplicities `c[y][x]` and one unitary conjugator `U_x`
//! per target block, with
//!
//! ```text
//! F(B)_x = U_x · diag_y(1_{c[y][x]} ⊗ B_y) · U_x†
//! ```
//!
//! Inside target block `x` the segments are ordered by `y` ascending; inside
//! a segment the copy index is the outer tensor factor and the source index
//! the inner one. [`BlockIndexMap`] records the resulting row ranges.
//!
//! A [`CpuMap`] `Q: A ⇝ B` stores one Choi matrix per component
//! `Q_yx: M_{m_x} → M_{n_y}`.

use std::ops::Range;

use crate::algebra::{
    c, hermitian_eigen, hermitian_part, max_abs, partial_trace_left, AlgebraElement, AlgebraSpec,
    CMat, State, ValidationReport, Violation, C64,
};
use crate::error::{Error, Result};

/// Row/column ranges of the standard-form segments inside each target block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockIndexMap {
    /// `offsets[x][y]`: first index of segment `y` in block `x`.
    offsets: Vec<Vec<usize>>,
    /// `lengths[x][y] = c[y][x] · n_y`.
    lengths: Vec<Vec<usize>>,
}

impl BlockIndexMap {
    fn new(source: &AlgebraSpec, target: &AlgebraSpec, mult: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(target.block_count());
        let mut lengths = Vec::with_capacity(target.block_count());
        for x in 0..target.block_count() {
            let mut off = 0;
            let mut o = Vec::with_capacity(source.block_count());
            let mut l = Vec::with_capacity(source.block_count());
            for (y, &n) in source.blocks().iter().enumerate() {
                o.push(off);
                l.push(mult[y][x] * n);
                off += mult[y][x] * n;
            }
            offsets.push(o);
            lengths.push(l);
        }
        Self { offsets, lengths }
    }

    pub fn segment(&self, x: usize, y: usize) -> Range<usize> {
        let o = self.offsets[x][y];
        o..o + self.lengths[x][y]
    }

    /// The `(y, y′)` segment `A_{x;yy′}` of a matrix on block `x`.
    pub fn extract(&self, a: &CMat, x: usize, y: usize, y_prime: usize) -> CMat {
        let r = self.segment(x, y);
        let s = self.segment(x, y_prime);
        a.view((r.start, s.start), (r.len(), s.len())).into_owned()
    }
}

/// A unital *-homomorphism in canonical `(multiplicities, conjugators)` form.
#[derive(Debug, Clone, PartialEq)]
pub struct StarHom {
    source: AlgebraSpec,
    target: AlgebraSpec,
    /// `mult[y][x]`: copies of source block `y` inside target block `x`.
    mult: Vec<Vec<usize>>,
    conjugators: Vec<CMat>,
}

impl StarHom {
    /// Checks unitality `Σ_y c[y][x]·n_y = m_x` exactly and unitarity of each
    /// conjugator within `atol`.
    pub fn new(
        source: AlgebraSpec,
        target: AlgebraSpec,
        mult: Vec<Vec<usize>>,
        conjugators: Vec<CMat>,
        atol: f64,
    ) -> Result<Self> {
        if mult.len() != source.block_count()
            || mult.iter().any(|row| row.len() != target.block_count())
        {
            return Err(Error::Shape {
                context: "multiplicity matrix",
                expected: (source.block_count(), target.block_count()),
                found: (mult.len(), mult.first().map_or(0, Vec::len)),
            });
        }
        for (x, &m) in target.blocks().iter().enumerate() {
            let sum: usize = (0..source.block_count())
                .map(|y| mult[y][x] * source.block_dim(y))
                .sum();
            if sum != m {
                return Err(Error::MultiplicityUnitality { x, sum, dim: m });
            }
        }
        target.check_blocks(&conjugators, "conjugators")?;
        for (x, u) in conjugators.iter().enumerate() {
            let residual = unitarity_residual(u);
            if residual > atol.max(1e-12) * (u.nrows() as f64).max(1.0) {
                return Err(Error::NotUnitary { block: x, residual });
            }
        }
        Ok(Self {
            source,
            target,
            mult,
            conjugators,
        })
    }

    /// The standard-form homomorphism with identity conjugators.
    pub fn standard(source: AlgebraSpec, target: AlgebraSpec, mult: Vec<Vec<usize>>) -> Result<Self> {
        let conjugators = target
            .blocks()
            .iter()
            .map(|&m| CMat::identity(m, m))
            .collect();
        Self::new(source, target, mult, conjugators, 0.0)
    }

    pub fn identity(spec: &AlgebraSpec) -> Self {
        let k = spec.block_count();
        let mult = (0..k)
            .map(|y| (0..k).map(|x| usize::from(x == y)).collect())
            .collect();
        Self::standard(spec.clone(), spec.clone(), mult).expect("identity multiplicities are unital")
    }

    pub fn source(&self) -> &AlgebraSpec {
        &self.source
    }

    pub fn target(&self) -> &AlgebraSpec {
        &self.target
    }

    /// `c[y][x]`, y-major.
    pub fn multiplicities(&self) -> &[Vec<usize>] {
        &self.mult
    }

    pub fn multiplicity(&self, y: usize, x: usize) -> usize {
        self.mult[y][x]
    }

    pub fn conjugators(&self) -> &[CMat] {
        &self.conjugators
    }

    pub fn layout(&self) -> BlockIndexMap {
        BlockIndexMap::new(&self.source, &self.target, &self.mult)
    }

    /// Largest `‖U_x − 1‖_F`; zero exactly when in standard form.
    pub fn standard_form_residual(&self) -> f64 {
        self.conjugators
            .iter()
            .map(|u| (u - CMat::identity(u.nrows(), u.ncols())).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_standard(&self, atol: f64) -> bool {
        self.standard_form_residual() <= atol
    }

    /// Same multiplicities, conjugators replaced by the identity.
    pub fn standardized(&self) -> StarHom {
        Self::standard(self.source.clone(), self.target.clone(), self.mult.clone())
            .expect("multiplicities already validated")
    }

    /// Same multiplicities with new conjugators.
    pub fn with_conjugators(&self, conjugators: Vec<CMat>, atol: f64) -> Result<StarHom> {
        Self::new(
            self.source.clone(),
            self.target.clone(),
            self.mult.clone(),
            conjugators,
            atol,
        )
    }

    /// `diag_y(1_{c[y][x]} ⊗ B_y)` without conjugation.
    fn standard_block(&self, b: &[CMat], x: usize) -> CMat {
        let m = self.target.block_dim(x);
        let mut out = CMat::zeros(m, m);
        let mut off = 0;
        for (y, by) in b.iter().enumerate() {
            let n = by.nrows();
            for _ in 0..self.mult[y][x] {
                out.view_mut((off, off), (n, n)).copy_from(by);
                off += n;
            }
        }
        out
    }

    /// `F(B)`.
    pub fn apply(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.source.ensure_same(b.spec())?;
        let blocks = (0..self.target.block_count())
            .map(|x| {
                let u = &self.conjugators[x];
                u * self.standard_block(b.blocks(), x) * u.adjoint()
            })
            .collect();
        AlgebraElement::new(self.target.clone(), blocks)
    }

    /// `ξ = ω∘F`, via `q_y σ_y = Σ_x tr_{M_c}((U_x† D_x U_x)_{yy})`.
    pub fn pushforward(&self, omega: &State) -> Result<State> {
        self.target.ensure_same(omega.spec())?;
        let layout = self.layout();
        let mut out: Vec<CMat> = self
            .source
            .blocks()
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        for (x, d) in omega.densities().iter().enumerate() {
            let u = &self.conjugators[x];
            let rotated = u.adjoint() * d * u;
            for (y, &n) in self.source.blocks().iter().enumerate() {
                let c = self.mult[y][x];
                if c == 0 {
                    continue;
                }
                let seg = layout.extract(&rotated, x, y, y);
                out[y] += partial_trace_left(&seg, c, n)?;
            }
        }
        State::new(self.source.clone(), out)
    }

    /// `F∘G` for `G: C → B` and `self = F: B → A`, in canonical form.
    ///
    /// Multiplicities are the integer product `c^{F∘G}[z][x] = Σ_y c^G[z][y]·c^F[y][x]`.
    /// The conjugator is `U_x · diag_y(1 ⊗ V_y) · P_x`, where `P_x` gathers
    /// the scattered copies of each `C_z` into consecutive segments.
    pub fn compose(&self, g: &StarHom) -> Result<StarHom> {
        self.source.ensure_same(&g.target)?;
        let f = self;
        let nz = g.source.block_count();
        let ny = f.source.block_count();
        let nx = f.target.block_count();
        let mult: Vec<Vec<usize>> = (0..nz)
            .map(|z| {
                (0..nx)
                    .map(|x| (0..ny).map(|y| g.mult[z][y] * f.mult[y][x]).sum())
                    .collect()
            })
            .collect();
        let g_layout = g.layout();
        let f_layout = f.layout();
        let o = g.source.blocks();
        let mut conjugators = Vec::with_capacity(nx);
        for x in 0..nx {
            let m = f.target.block_dim(x);
            // diag_y(1_{c^F} ⊗ V_y)
            let mut w = CMat::zeros(m, m);
            for y in 0..ny {
                let n = f.source.block_dim(y);
                let seg = f_layout.segment(x, y);
                for k in 0..f.mult[y][x] {
                    let s = seg.start + k * n;
                    w.view_mut((s, s), (n, n)).copy_from(&g.conjugators[y]);
                }
            }
            // Standard offsets of each z in the composite block.
            let mut z_off = vec![0; nz];
            let mut acc = 0;
            for z in 0..nz {
                z_off[z] = acc;
                acc += mult[z][x] * o[z];
            }
            let mut perm = CMat::zeros(m, m);
            let mut copies_seen = vec![0; nz];
            for y in 0..ny {
                let n = f.source.block_dim(y);
                let seg = f_layout.segment(x, y);
                for kf in 0..f.mult[y][x] {
                    for z in 0..nz {
                        let gseg = g_layout.segment(y, z);
                        for kg in 0..g.mult[z][y] {
                            let copy = copies_seen[z];
                            copies_seen[z] += 1;
                            for i in 0..o[z] {
                                let scattered = seg.start + kf * n + gseg.start + kg * o[z] + i;
                                let standard = z_off[z] + copy * o[z] + i;
                                perm[(scattered, standard)] = c(1.0);
                            }
                        }
                    }
                }
            }
            conjugators.push(&f.conjugators[x] * w * perm);
        }
        StarHom::new(
            g.source.clone(),
            f.target.clone(),
            mult,
            conjugators,
            1e-10,
        )
    }

    /// `F ⊕ F̄` between direct-sum algebras, cross multiplicities zero.
    pub fn direct_sum(&self, other: &StarHom) -> StarHom {
        let (ny, nx) = (self.source.block_count(), self.target.block_count());
        let (ny2, nx2) = (other.source.block_count(), other.target.block_count());
        let mut mult = vec![vec![0; nx + nx2]; ny + ny2];
        for y in 0..ny {
            mult[y][..nx].copy_from_slice(&self.mult[y]);
        }
        for y in 0..ny2 {
            mult[ny + y][nx..].copy_from_slice(&other.mult[y]);
        }
        let mut conjugators = self.conjugators.clone();
        conjugators.extend(other.conjugators.iter().cloned());
        StarHom {
            source: self.source.direct_sum(&other.source),
            target: self.target.direct_sum(&other.target),
            mult,
            conjugators,
        }
    }

    pub fn to_raw(&self) -> RawLinearMap {
        RawLinearMap::from_fn(&self.source, &self.target, |b| {
            self.apply(b).expect("element built on source")
        })
    }

    /// Extracts the canonical form of a raw linear map that is a unital
    /// *-homomorphism.
    ///
    /// Multiplicities are `tr(L_x(1_y))/n_y` rounded to the nearest integer.
    /// Columns of `U_x` are `L_x(E^{(y)}_{j0})·v_k` for an orthonormal basis
    /// `{v_k}` of the range of `L_x(E^{(y)}_{00})`, ordered by `(y, k, j)`.
    pub fn from_raw(raw: &RawLinearMap, atol: f64) -> Result<StarHom> {
        let source = raw.source.clone();
        let target = raw.target.clone();
        raw.check_homomorphism(atol)?;
        let nx = target.block_count();
        let ny = source.block_count();
        let mut mult = vec![vec![0usize; nx]; ny];
        for (y, &n) in source.blocks().iter().enumerate() {
            let mut unit = AlgebraElement::zero(&source).into_blocks();
            unit[y] = CMat::identity(n, n);
            let image = raw.apply(&AlgebraElement::new(source.clone(), unit)?)?;
            for x in 0..nx {
                let value = image.block(x).trace().re / n as f64;
                let rounded = value.round();
                if (value - rounded).abs() > atol.max(1e-12) || rounded < 0.0 {
                    return Err(Error::NonIntegralMultiplicity { y, x, value });
                }
                mult[y][x] = rounded as usize;
            }
        }
        let mut conjugators = Vec::with_capacity(nx);
        for (x, &m) in target.blocks().iter().enumerate() {
            let mut u = CMat::zeros(m, m);
            let mut col = 0;
            for (y, &n) in source.blocks().iter().enumerate() {
                let c = mult[y][x];
                if c == 0 {
                    continue;
                }
                let images: Vec<CMat> = (0..n)
                    .map(|j| {
                        raw.apply(&AlgebraElement::matrix_unit(&source, y, j, 0))
                            .map(|e| e.block(x).clone())
                    })
                    .collect::<Result<_>>()?;
                let eig = hermitian_eigen(&hermitian_part(&images[0]))?;
                let range: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
                if range.len() != c {
                    return Err(Error::NotHomomorphism {
                        axiom: "rank of minimal projection",
                        residual: (range.len() as f64 - c as f64).abs(),
                    });
                }
                for &r in &range {
                    let v = eig.eigenvectors.column(r).into_owned();
                    for image in &images {
                        if col >= m {
                            return Err(Error::MultiplicityUnitality { x, sum: col + 1, dim: m });
                        }
                        u.set_column(col, &(image * &v));
                        col += 1;
                    }
                }
            }
            conjugators.push(u);
        }
        StarHom::new(source, target, mult, conjugators, atol.max(1e-10))
    }
}

fn unitarity_residual(u: &CMat) -> f64 {
    (u.adjoint() * u - CMat::identity(u.ncols(), u.ncols())).norm()
}

/// A dense matrix acting on vectorized elements (see [`AlgebraElement::to_vector`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RawLinearMap {
    source: AlgebraSpec,
    target: AlgebraSpec,
    /// Shape `target.dim() × source.dim()`.
    matrix: CMat,
}

impl RawLinearMap {
    pub fn new(source: AlgebraSpec, target: AlgebraSpec, matrix: CMat) -> Result<Self> {
        let expected = (target.dim(), source.dim());
        if matrix.shape() != expected {
            return Err(Error::Shape {
                context: "raw linear map",
                expected,
                found: matrix.shape(),
            });
        }
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    /// Tabulates a linear map on the matrix units of `source`.
    pub fn from_fn(
        source: &AlgebraSpec,
        target: &AlgebraSpec,
        f: impl Fn(&AlgebraElement) -> AlgebraElement,
    ) -> Self {
        let mut matrix = CMat::zeros(target.dim(), source.dim());
        let mut col = 0;
        for (x, &m) in source.blocks().iter().enumerate() {
            // column-major vec order within the block
            for j in 0..m {
                for i in 0..m {
                    let image = f(&AlgebraElement::matrix_unit(source, x, i, j)).to_vector();
                    for (r, v) in image.into_iter().enumerate() {
                        matrix[(r, col)] = v;
                    }
                    col += 1;
                }
            }
        }
        Self {
            source: source.clone(),
            target: target.clone(),
            matrix,
        }
    }

    pub fn source(&self) -> &AlgebraSpec {
        &self.source
    }

    pub fn target(&self) -> &AlgebraSpec {
        &self.target
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.source.ensure_same(b.spec())?;
        let v = nalgebra::DVector::from_vec(b.to_vector());
        let out = &self.matrix * v;
        AlgebraElement::from_vector(&self.target, out.as_slice())
    }

    /// Verifies unitality, adjoint preservation and multiplicativity on matrix units.
    pub fn check_homomorphism(&self, atol: f64) -> Result<()> {
        let tol = atol.max(1e-12);
        let one = self.apply(&AlgebraElement::identity(&self.source))?;
        let residual = one.distance(&AlgebraElement::identity(&self.target));
        if residual > tol {
            return Err(Error::NotHomomorphism {
                axiom: "unitality",
                residual,
            });
        }
        let idx: Vec<_> = self.source.matrix_unit_indices().collect();
        let images: Vec<AlgebraElement> = idx
            .iter()
            .map(|&(x, i, j)| self.apply(&AlgebraElement::matrix_unit(&self.source, x, i, j)))
            .collect::<Result<_>>()?;
        let position = |x: usize, i: usize, j: usize| {
            idx.iter()
                .position(|&t| t == (x, i, j))
                .expect("matrix unit index")
        };
        for (a, &(x, i, j)) in idx.iter().enumerate() {
            let residual = images[a].adjoint().distance(&images[position(x, j, i)]);
            if residual > tol {
                return Err(Error::NotHomomorphism {
                    axiom: "adjoint preservation",
                    residual,
                });
            }
        }
        let zero = AlgebraElement::zero(&self.target);
        for (a, &(x, i, j)) in idx.iter().enumerate() {
            for (b, &(x2, k, l)) in idx.iter().enumerate() {
                let product = images[a].mul(&images[b])?;
                let expected = if x == x2 && j == k {
                    &images[position(x, i, l)]
                } else {
                    &zero
                };
                let residual = product.distance(expected);
                if residual > tol {
                    return Err(Error::NotHomomorphism {
                        axiom: "multiplicativity",
                        residual,
                    });
                }
            }
        }
        Ok(())
    }
}

/// A linear map `Q: A ⇝ B` stored as Choi matrices of its components
/// `Q_yx: M_{m_x} → M_{n_y}`.
///
/// Choi convention (column-major vec, input factor outer):
/// `J_yx = Σ_{ij} E_ij ⊗ Q_yx(E_ij)`, so `J_yx[(i·n + a, j·n + b)] = Q_yx(E_ij)[a, b]`
/// and `Q_yx(A) = Σ_{ij} A[i,j] · J_yx[i·n.., j·n..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpuMap {
    source: AlgebraSpec,
    target: AlgebraSpec,
    /// `choi[y][x]`, each `(m_x·n_y) × (m_x·n_y)`.
    choi: Vec<Vec<CMat>>,
}

impl CpuMap {
    pub fn new(source: AlgebraSpec, target: AlgebraSpec, choi: Vec<Vec<CMat>>) -> Result<Self> {
        if choi.len() != target.block_count()
            || choi.iter().any(|row| row.len() != source.block_count())
        {
            return Err(Error::Shape {
                context: "Choi component grid",
                expected: (target.block_count(), source.block_count()),
                found: (choi.len(), choi.first().map_or(0, Vec::len)),
            });
        }
        for (y, &n) in target.blocks().iter().enumerate() {
            for (x, &m) in source.blocks().iter().enumerate() {
                if choi[y][x].shape() != (m * n, m * n) {
                    return Err(Error::Shape {
                        context: "Choi matrix",
                        expected: (m * n, m * n),
                        found: choi[y][x].shape(),
                    });
                }
            }
        }
        Ok(Self {
            source,
            target,
            choi,
        })
    }

    /// Tabulates components from their action on matrix units: `f(y, x, E_ij)`.
    pub fn from_components(
        source: &AlgebraSpec,
        target: &AlgebraSpec,
        f: impl Fn(usize, usize, &CMat) -> CMat,
    ) -> Self {
        let choi = target
            .blocks()
            .iter()
            .enumerate()
            .map(|(y, &n)| {
                source
                    .blocks()
                    .iter()
                    .enumerate()
                    .map(|(x, &m)| {
                        let mut j = CMat::zeros(m * n, m * n);
                        let mut e = CMat::zeros(m, m);
                        for a in 0..m {
                            for b in 0..m {
                                e[(a, b)] = c(1.0);
                                let image = f(y, x, &e);
                                debug_assert_eq!(image.shape(), (n, n));
                                j.view_mut((a * n, b * n), (n, n)).copy_from(&image);
                                e[(a, b)] = c(0.0);
                            }
                        }
                        j
                    })
                    .collect()
            })
            .collect();
        Self {
            source: source.clone(),
            target: target.clone(),
            choi,
        }
    }

    pub fn identity(spec: &AlgebraSpec) -> Self {
        Self::from_components(spec, spec, |y, x, e| {
            if x == y {
                e.clone()
            } else {
                CMat::zeros(spec.block_dim(y), spec.block_dim(y))
            }
        })
    }

    pub fn source(&self) -> &AlgebraSpec {
        &self.source
    }

    pub fn target(&self) -> &AlgebraSpec {
        &self.target
    }

    pub fn choi(&self, y: usize, x: usize) -> &CMat {
        &self.choi[y][x]
    }

    pub fn choi_grid(&self) -> &[Vec<CMat>] {
        &self.choi
    }

    /// `Q_yx(A_x)`.
    pub fn apply_component(&self, y: usize, x: usize, a: &CMat) -> CMat {
        let n = self.target.block_dim(y);
        let m = self.source.block_dim(x);
        let j = &self.choi[y][x];
        let mut out = CMat::zeros(n, n);
        for i in 0..m {
            for k in 0..m {
                let coef = a[(i, k)];
                if coef != C64::new(0.0, 0.0) {
                    out += j.view((i * n, k * n), (n, n)) * coef;
                }
            }
        }
        out
    }

    /// Trace dual `Q_yx†: M_{n_y} → M_{m_x}` with `tr(Q_yx†(D) A) = tr(D Q_yx(A))`.
    pub fn dual_component(&self, y: usize, x: usize, d: &CMat) -> CMat {
        let n = self.target.block_dim(y);
        let m = self.source.block_dim(x);
        let j = &self.choi[y][x];
        CMat::from_fn(m, m, |col, row| {
            // X[col,row] = tr(D · J(row, col))
            (d * j.view((row * n, col * n), (n, n))).trace()
        })
    }

    /// `Q(A)`, block `y` being `Σ_x Q_yx(A_x)`.
    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.source.ensure_same(a.spec())?;
        let blocks = (0..self.target.block_count())
            .map(|y| {
                let n = self.target.block_dim(y);
                a.blocks()
                    .iter()
                    .enumerate()
                    .fold(CMat::zeros(n, n), |acc, (x, ax)| {
                        acc + self.apply_component(y, x, ax)
                    })
            })
            .collect();
        AlgebraElement::new(self.target.clone(), blocks)
    }

    /// The state `ξ∘Q` on the source, density `Σ_y Q_yx†(Ξ_y)` on block `x`.
    pub fn pullback_state(&self, xi: &State) -> Result<State> {
        self.target.ensure_same(xi.spec())?;
        let densities = self
            .source
            .blocks()
            .iter()
            .enumerate()
            .map(|(x, &m)| {
                xi.densities()
                    .iter()
                    .enumerate()
                    .fold(CMat::zeros(m, m), |acc, (y, d)| {
                        acc + self.dual_component(y, x, d)
                    })
            })
            .collect();
        State::new(self.source.clone(), densities)
    }

    /// `self ∘ q` (apply `q` first), with `(R∘Q)_zx = Σ_y R_zy ∘ Q_yx`.
    pub fn compose(&self, q: &CpuMap) -> Result<CpuMap> {
        q.target.ensure_same(&self.source)?;
        let r = self;
        Ok(CpuMap::from_components(&q.source, &r.target, |z, x, e| {
            let o = r.target.block_dim(z);
            (0..q.target.block_count()).fold(CMat::zeros(o, o), |acc, y| {
                acc + r.apply_component(z, y, &q.apply_component(y, x, e))
            })
        }))
    }

    /// `Q ⊕ Q̄` with zero cross components.
    pub fn direct_sum(&self, other: &CpuMap) -> CpuMap {
        let source = self.source.direct_sum(&other.source);
        let target = self.target.direct_sum(&other.target);
        let nx = self.source.block_count();
        let ny = self.target.block_count();
        let choi = target
            .blocks()
            .iter()
            .enumerate()
            .map(|(y, &n)| {
                source
                    .blocks()
                    .iter()
                    .enumerate()
                    .map(|(x, &m)| match (y < ny, x < nx) {
                        (true, true) => self.choi[y][x].clone(),
                        (false, false) => other.choi[y - ny][x - nx].clone(),
                        _ => CMat::zeros(m * n, m * n),
                    })
                    .collect()
            })
            .collect();
        CpuMap {
            source,
            target,
            choi,
        }
    }

    /// Complete positivity per component and unitality per target block.
    pub fn validate(&self, atol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (y, row) in self.choi.iter().enumerate() {
            for (x, j) in row.iter().enumerate() {
                let asym = max_abs(&(j - j.adjoint()));
                if asym > atol {
                    report.push(Violation::ChoiNotHermitian { y, x, residual: asym });
                }
                if j.nrows() == 0 {
                    continue;
                }
                let min = hermitian_part(j)
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                if min < -atol {
                    report.push(Violation::NotCompletelyPositive {
                        y,
                        x,
                        min_eigenvalue: min,
                    });
                }
            }
        }
        let one = self
            .apply(&AlgebraElement::identity(&self.source))
            .expect("identity built on source");
        for (y, b) in one.blocks().iter().enumerate() {
            let residual = (b - CMat::identity(b.nrows(), b.ncols())).norm();
            if residual > atol {
                report.push(Violation::NotUnital { y, residual });
            }
        }
        report
    }
}

/// `F(B)`.
pub fn apply_hom(f: &StarHom, b: &AlgebraElement) -> Result<AlgebraElement> {
    f.apply(b)
}

/// Canonical form of a raw unital *-homomorphism.
pub fn hom_from_raw(raw: &RawLinearMap, atol: f64) -> Result<StarHom> {
    StarHom::from_raw(raw, atol)
}

/// `F∘G`.
pub fn compose_homs(f: &StarHom, g: &StarHom) -> Result<StarHom> {
    f.compose(g)
}

/// `ω∘F`.
pub fn pushforward_state(omega: &State, f: &StarHom) -> Result<State> {
    f.pushforward(omega)
}

/// `Q(A)`.
pub fn apply_cpu(q: &CpuMap, a: &AlgebraElement) -> Result<AlgebraElement> {
    q.apply(a)
}

/// `R∘Q`: apply `Q` then `R`.
pub fn compose_cpu(r: &CpuMap, q: &CpuMap) -> Result<CpuMap> {
    r.compose(q)
}

pub fn validate_cpu(q: &CpuMap, atol: f64) -> ValidationReport {
    q.validate(atol)
}

/// `Ad_U: A ↦ U A U†` as both a *-homomorphism and a CPU map.
pub fn ad_unitary(u: &AlgebraElement, atol: f64) -> Result<(StarHom, CpuMap)> {
    let spec = u.spec().clone();
    let k = spec.block_count();
    let mult = (0..k)
        .map(|y| (0..k).map(|x| usize::from(x == y)).collect())
        .collect();
    let hom = StarHom::new(spec.clone(), spec.clone(), mult, u.blocks().to_vec(), atol)?;
    let cpu = ad_cpu(u.blocks());
    Ok((hom, cpu))
}

/// CPU map `A ↦ U A U†` for per-block matrices `U_x`, no unitarity check.
pub(crate) fn ad_cpu(u: &[CMat]) -> CpuMap {
    let spec = AlgebraSpec::new(u.iter().map(CMat::nrows).collect())
        .expect("conjugators are non-empty square blocks");
    CpuMap::from_components(&spec, &spec, |y, x, e| {
        if x == y {
            &u[x] * e * u[x].adjoint()
        } else {
            CMat::zeros(spec.block_dim(y), spec.block_dim(y))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(b: &[usize]) -> AlgebraSpec {
        AlgebraSpec::new(b.to_vec()).unwrap()
    }

    fn scalar(v: f64) -> CMat {
        CMat::from_element(1, 1, c(v))
    }

    fn diagonal_embedding() -> StarHom {
        StarHom::standard(spec(&[1, 1]), spec(&[2]), vec![vec![1], vec![1]]).unwrap()
    }

    fn pauli_x() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    fn transpose_raw() -> RawLinearMap {
        let s = spec(&[2]);
        RawLinearMap::from_fn(&s, &s, |b| {
            AlgebraElement::new(s.clone(), vec![b.block(0).transpose()]).unwrap()
        })
    }

    #[test]
    fn diagonal_embedding_apply() {
        let f = diagonal_embedding();
        let b = AlgebraElement::new(spec(&[1, 1]), vec![scalar(3.0), scalar(-2.0)]).unwrap();
        let a = f.apply(&b).unwrap();
        let expected = CMat::from_row_slice(2, 2, &[c(3.0), c(0.0), c(0.0), c(-2.0)]);
        assert_eq!(a.block(0), &expected);
    }

    #[test]
    fn doubling_apply_is_kron() {
        let f = StarHom::standard(spec(&[2]), spec(&[4]), vec![vec![2]]).unwrap();
        let b = CMat::from_row_slice(2, 2, &[c(1.0), C64::new(0.0, 2.0), c(3.0), c(4.0)]);
        let a = f
            .apply(&AlgebraElement::new(spec(&[2]), vec![b.clone()]).unwrap())
            .unwrap();
        assert!((a.block(0) - CMat::identity(2, 2).kronecker(&b)).norm() < 1e-15);
    }

    #[test]
    fn bad_multiplicities_rejected() {
        assert!(matches!(
            StarHom::standard(spec(&[1, 1]), spec(&[3]), vec![vec![1], vec![1]]),
            Err(Error::MultiplicityUnitality { .. })
        ));
    }

    #[test]
    fn non_unitary_conjugator_rejected() {
        let f = diagonal_embedding();
        assert!(matches!(
            f.with_conjugators(vec![CMat::identity(2, 2).scale(2.0)], 1e-9),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn from_raw_identity() {
        let s = spec(&[2]);
        let raw = RawLinearMap::from_fn(&s, &s, |b| b.clone());
        let f = StarHom::from_raw(&raw, 1e-9).unwrap();
        assert_eq!(f.multiplicities(), &[vec![1]]);
        for e in AlgebraElement::matrix_units(&s) {
            assert!(f.apply(&e).unwrap().distance(&e) < 1e-12);
        }
    }

    #[test]
    fn from_raw_permuted_doubling() {
        // P swaps the middle coordinates of C^4
        let mut p = CMat::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            p[(i, j)] = c(1.0);
        }
        let (s2, s4) = (spec(&[2]), spec(&[4]));
        let raw = RawLinearMap::from_fn(&s2, &s4, |b| {
            let a = &p * CMat::identity(2, 2).kronecker(b.block(0)) * p.transpose();
            AlgebraElement::new(s4.clone(), vec![a]).unwrap()
        });
        let f = StarHom::from_raw(&raw, 1e-9).unwrap();
        assert_eq!(f.multiplicities(), &[vec![2]]);
        for e in AlgebraElement::matrix_units(&s2) {
            assert!(f.apply(&e).unwrap().distance(&raw.apply(&e).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn from_raw_rejects_transpose() {
        match StarHom::from_raw(&transpose_raw(), 1e-9) {
            Err(Error::NotHomomorphism { axiom, residual }) => {
                assert_eq!(axiom, "multiplicativity");
                assert!(residual > 0.5);
            }
            other => panic!("expected multiplicativity failure, got {other:?}"),
        }
    }

    #[test]
    fn compose_two_into_three() {
        // F: C⊕C → M_3 with c=[[2],[1]], G: C → C⊕C with c=[[1,1]]
        let f = StarHom::standard(spec(&[1, 1]), spec(&[3]), vec![vec![2], vec![1]]).unwrap();
        let g = StarHom::standard(spec(&[1]), spec(&[1, 1]), vec![vec![1, 1]]).unwrap();
        let h = f.compose(&g).unwrap();
        assert_eq!(h.multiplicities(), &[vec![3]]);
        let e = AlgebraElement::identity(&spec(&[1]));
        assert!(h
            .apply(&e)
            .unwrap()
            .distance(&AlgebraElement::identity(&spec(&[3])))
            < 1e-14);
    }

    #[test]
    fn compose_with_identity() {
        let f = diagonal_embedding();
        let h = f.compose(&StarHom::identity(&spec(&[1, 1]))).unwrap();
        assert_eq!(h.multiplicities(), f.multiplicities());
        let h2 = StarHom::identity(&spec(&[2])).compose(&f).unwrap();
        for e in AlgebraElement::matrix_units(&spec(&[1, 1])) {
            assert!(h.apply(&e).unwrap().distance(&f.apply(&e).unwrap()) < 1e-14);
            assert!(h2.apply(&e).unwrap().distance(&f.apply(&e).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn pushforward_diagonal_embedding() {
        let d = CMat::from_row_slice(
            2,
            2,
            &[c(0.7), C64::new(0.0, 0.1), C64::new(0.0, -0.1), c(0.3)],
        );
        let omega = State::new(spec(&[2]), vec![d]).unwrap();
        let xi = diagonal_embedding().pushforward(&omega).unwrap();
        assert!((xi.density(0)[(0, 0)] - c(0.7)).norm() < 1e-15);
        assert!((xi.density(1)[(0, 0)] - c(0.3)).norm() < 1e-15);
    }

    #[test]
    fn pushforward_doubling_maximally_mixed() {
        let f = StarHom::standard(spec(&[2]), spec(&[4]), vec![vec![2]]).unwrap();
        let xi = f.pushforward(&State::maximally_mixed(&spec(&[4]))).unwrap();
        assert!(xi.distance(&State::maximally_mixed(&spec(&[2]))) < 1e-15);
    }

    #[test]
    fn identity_channel_is_valid_and_acts_trivially() {
        let s = spec(&[2, 1]);
        let q = CpuMap::identity(&s);
        assert!(q.validate(1e-9).is_valid());
        for e in AlgebraElement::matrix_units(&s) {
            assert!(q.apply(&e).unwrap().distance(&e) < 1e-15);
        }
    }

    #[test]
    fn transpose_component_fails_cp() {
        let s = spec(&[2]);
        let q = CpuMap::from_components(&s, &s, |_, _, e| e.transpose());
        let r = q.validate(1e-9);
        assert_eq!(r.violations.len(), 1);
        match &r.violations[0] {
            Violation::NotCompletelyPositive { min_eigenvalue, .. } => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12)
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn trace_scaling_map_is_valid() {
        // Q_yx(A) = w_x tr(A)/m_x 1_{n_y}, weights summing to 1
        let (a, b) = (spec(&[2, 3]), spec(&[2]));
        let w = [0.25, 0.75];
        let q = CpuMap::from_components(&a, &b, |_, x, e| {
            CMat::identity(2, 2).scale(w[x] * e.trace().re / a.block_dim(x) as f64)
        });
        assert!(q.validate(1e-9).is_valid());
        let one = q.apply(&AlgebraElement::identity(&a)).unwrap();
        assert!(one.distance(&AlgebraElement::identity(&b)) < 1e-15);
    }

    #[test]
    fn non_unital_map_reported() {
        let s = spec(&[2]);
        let q = CpuMap::from_components(&s, &s, |_, _, e| e.scale(0.5));
        assert!(q
            .validate(1e-9)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotUnital { .. })));
    }

    #[test]
    fn depolarizing_maps_compose_to_product_contraction() {
        let s = spec(&[2]);
        let depol = |t: f64| {
            CpuMap::from_components(&s, &s, move |_, _, e| {
                e.scale(t) + CMat::identity(2, 2).scale((1.0 - t) * e.trace().re / 2.0)
            })
        };
        let composed = depol(0.5).compose(&depol(0.4)).unwrap();
        let expected = depol(0.2);
        for e in AlgebraElement::matrix_units(&s) {
            let got = composed.apply(&e).unwrap();
            assert!(got.distance(&expected.apply(&e).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn pauli_conjugation() {
        let s = spec(&[2]);
        let u = AlgebraElement::new(s.clone(), vec![pauli_x()]).unwrap();
        let (hom, cpu) = ad_unitary(&u, 1e-9).unwrap();
        let d = AlgebraElement::new(
            s.clone(),
            vec![CMat::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(5.0)])],
        )
        .unwrap();
        let expected = CMat::from_row_slice(2, 2, &[c(5.0), c(0.0), c(0.0), c(2.0)]);
        assert_eq!(hom.apply(&d).unwrap().block(0), &expected);
        assert!((cpu.apply(&d).unwrap().block(0) - &expected).norm() < 1e-15);
    }

    #[test]
    fn ad_rejects_non_unitary() {
        let s = spec(&[2]);
        let u = AlgebraElement::new(s, vec![CMat::identity(2, 2).scale(3.0)]).unwrap();
        assert!(ad_unitary(&u, 1e-9).is_err());
    }

    #[test]
    fn dual_component_is_trace_adjoint() {
        let s = spec(&[2]);
        let q = CpuMap::from_components(&s, &s, |_, _, e| {
            let u = pauli_x();
            &u * e * &u
        });
        let d = CMat::from_row_slice(2, 2, &[c(0.6), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.4)]);
        let a = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), C64::new(0.0, 1.0), c(-1.0)]);
        let lhs = (q.dual_component(0, 0, &d) * &a).trace();
        let rhs = (&d * q.apply_component(0, 0, &a)).trace();
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
