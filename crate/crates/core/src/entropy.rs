//! Von Neumann entropy, Umegaki relative entropy and the RE functor.
//!
//! `RE` sends a morphism `(F, Q): (B, ξ) → (A, ω)` to `S(ω ‖ ξ∘Q)`. It is
//! additive under composition when every term is finite, affine under convex
//! sums, zero on optimal hypotheses, and invariant under rectification.

use std::fmt;
use std::ops::Add;

use crate::algebra::{
    hermitian_eigen, hermitian_log, partial_trace_left, projection_above, AlgebraSpec, CMat,
    HermitianEigen, State,
};
use crate::error::{Error, Result};
use crate::hypotheses::{
    compose_morphisms, extract_alphas, hypothesis_from_alphas, rectify_pair, AlphaFamily,
    NcMorphism, NcObject,
};
use crate::maps::StarHom;
use crate::Tolerances;

/// A value in `(−∞, ∞]` with saturating addition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// `f64::INFINITY` for the infinite value.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => write!(f, "inf"),
        }
    }
}

fn check_state(omega: &State, atol: f64) -> Result<()> {
    let report = omega.validate(atol);
    if !report.is_valid() {
        return Err(Error::InvalidState(report));
    }
    Ok(())
}

fn eigs(omega: &State) -> Result<Vec<HermitianEigen>> {
    omega.densities().iter().map(hermitian_eigen).collect()
}

fn scale_of(e: &[HermitianEigen]) -> f64 {
    e.iter()
        .map(HermitianEigen::max_eigenvalue)
        .fold(0.0, f64::max)
}

/// `Σ_x tr(D_x ln D_x)` over eigenvalues above `cutoff · λ_max`, i.e. `−S(ω)`.
fn neg_entropy(e: &[HermitianEigen], cutoff: f64) -> f64 {
    let threshold = cutoff * scale_of(e);
    e.iter()
        .flat_map(|e| e.eigenvalues.iter())
        .filter(|&&l| l > threshold && l > 0.0)
        .map(|&l| l * l.ln())
        .sum()
}

/// `S(ω) = −Σ_x tr(D_x ln D_x)` in nats, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(omega: &State, tol: Tolerances) -> Result<f64> {
    check_state(omega, tol.atol)?;
    Ok(-neg_entropy(&eigs(omega)?, tol.cutoff))
}

/// Umegaki relative entropy `S(ω ‖ ω′)`, infinite unless `ω ⪯ ω′`.
///
/// Supports are decided blockwise with eigenvalue cutoff `cutoff · λ_max`,
/// `λ_max` taken over all blocks of the respective state. The finite value is
///
/// ```text
/// Σ_x [ Σ_i λ_i ln λ_i − Σ_{i,j} |⟨u_i|v_j⟩|² λ_i ln μ_j ]
/// ```
///
/// over supported eigenpairs `(λ_i, u_i)` of `D_x` and `(μ_j, v_j)` of `D′_x`.
pub fn relative_entropy(omega: &State, omega_prime: &State, cutoff: f64) -> Result<ExtendedReal> {
    omega.spec().ensure_same(omega_prime.spec())?;
    let e = eigs(omega)?;
    let e_prime = eigs(omega_prime)?;
    let threshold = cutoff * scale_of(&e);
    let threshold_prime = cutoff * scale_of(&e_prime);
    let leak_tol = cutoff.max(1e-12);
    let mut total = 0.0;
    for (d, d_prime) in e.iter().zip(&e_prime) {
        let p = projection_above(d, threshold);
        let comp = CMat::identity(p.nrows(), p.ncols()) - projection_above(d_prime, threshold_prime);
        let leak = &comp * &p * &comp;
        if leak.nrows() > 0 {
            let norm = hermitian_eigen(&leak)?
                .eigenvalues
                .iter()
                .map(|l| l.abs())
                .fold(0.0, f64::max);
            if norm > leak_tol {
                return Ok(ExtendedReal::Infinite);
            }
        }
        let overlap = d.eigenvectors.adjoint() * &d_prime.eigenvectors;
        for (i, &l) in d.eigenvalues.iter().enumerate() {
            if l <= threshold || l <= 0.0 {
                continue;
            }
            total += l * l.ln();
            for (j, &mu) in d_prime.eigenvalues.iter().enumerate() {
                let w = overlap[(i, j)].norm_sqr() * l;
                if mu > threshold_prime && mu > 0.0 {
                    total -= w * mu.ln();
                } else if w > leak_tol * threshold.max(l) {
                    return Ok(ExtendedReal::Infinite);
                }
            }
        }
    }
    Ok(ExtendedReal::Finite(total))
}

/// `RE(F, Q) = S(ω ‖ ξ∘Q)` for a validated morphism.
pub fn re_functor(m: &NcMorphism, tol: Tolerances) -> Result<ExtendedReal> {
    let report = m.validate(tol.atol);
    if !report.is_valid() {
        return Err(Error::InvalidMorphism(report));
    }
    re_unchecked(m, tol.cutoff)
}

/// [`re_functor`] without validating the morphism axioms.
pub fn re_unchecked(m: &NcMorphism, cutoff: f64) -> Result<ExtendedReal> {
    relative_entropy(m.target().state(), &m.predicted_state()?, cutoff)
}

/// `H(first | second) = S(ρ_second) − S(ρ)` for a single-block state on
/// `C^first ⊗ C^second`.
///
/// This is `tr(ρ ln ρ) − tr(ρ_2 ln ρ_2)`, the negative of the common
/// textbook convention `S(ρ) − S(ρ_2)`. The chain rule
/// `H(AB|C) = H(A|BC) + H(B|C)` holds either way, and the RE identities of
/// the chain-rule morphisms need this sign.
pub fn conditional_entropy(rho: &State, first: usize, second: usize, tol: Tolerances) -> Result<f64> {
    let joint = single_block(rho, first * second)?;
    let marginal = partial_trace_left(joint, first, second)?;
    let marginal = State::new(AlgebraSpec::full(second)?, vec![marginal])?;
    Ok(von_neumann_entropy(&marginal, tol)? - von_neumann_entropy(rho, tol)?)
}

fn single_block(rho: &State, dim: usize) -> Result<&CMat> {
    if rho.spec().blocks() != [dim] {
        return Err(Error::Dimension(format!(
            "expected a single {dim}×{dim} block, found blocks {:?}",
            rho.spec().blocks()
        )));
    }
    Ok(rho.density(0))
}

/// Reduced state `tr_A ρ` on `C^a ⊗ C^b` as a single-block state.
pub fn reduce_left(rho: &State, a: usize, b: usize) -> Result<State> {
    let joint = single_block(rho, a * b)?;
    State::new(AlgebraSpec::full(b)?, vec![partial_trace_left(joint, a, b)?])
}

/// The composable pair
/// `(C, ρ_C) --(G,R)--> (B⊗C, ρ_BC) --(F,Q)--> (A⊗B⊗C, ρ_ABC)`
/// with `G = 1_B ⊗ (·)`, `F = 1_A ⊗ (·)`, `R = tr_B((υ_B ⊗ 1) ·)` and
/// `Q = tr_A((υ_A ⊗ 1) ·)`, `υ` the maximally mixed states.
pub fn chain_rule_pair(rho_abc: &State, dims: [usize; 3]) -> Result<(NcMorphism, NcMorphism)> {
    let [da, db, dc] = dims;
    single_block(rho_abc, da * db * dc)?;
    let rho_bc = reduce_left(rho_abc, da, db * dc)?;
    let rho_c = reduce_left(&rho_bc, db, dc)?;
    let g = StarHom::standard(
        AlgebraSpec::full(dc)?,
        AlgebraSpec::full(db * dc)?,
        vec![vec![db]],
    )?;
    let f = StarHom::standard(
        AlgebraSpec::full(db * dc)?,
        AlgebraSpec::full(da * db * dc)?,
        vec![vec![da]],
    )?;
    let r = hypothesis_from_alphas(&g, &AlphaFamily::uniform(&g))?;
    let q = hypothesis_from_alphas(&f, &AlphaFamily::uniform(&f))?;
    let gm = NcMorphism::new(
        NcObject::unchecked(rho_c),
        NcObject::unchecked(rho_bc.clone()),
        g,
        r,
    )?;
    let fm = NcMorphism::new(
        NcObject::unchecked(rho_bc),
        NcObject::unchecked(rho_abc.clone()),
        f,
        q,
    )?;
    Ok((gm, fm))
}

/// Conditional entropies and RE values of the chain-rule pair.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChainRule {
    pub h_ab_given_c: f64,
    pub h_a_given_bc: f64,
    pub h_b_given_c: f64,
    /// `RE(F∘G, R∘Q)`, expected `H(AB|C) + ln d_A + ln d_B`.
    pub re_composite: f64,
    /// `RE(G, R)`, expected `H(B|C) + ln d_B`.
    pub re_g: f64,
    /// `RE(F, Q)`, expected `H(A|BC) + ln d_A`.
    pub re_f: f64,
    pub ln_da: f64,
    pub ln_db: f64,
}

impl ChainRule {
    /// `|H(AB|C) − H(A|BC) − H(B|C)|`.
    pub fn chain_rule_defect(&self) -> f64 {
        (self.h_ab_given_c - self.h_a_given_bc - self.h_b_given_c).abs()
    }

    /// Defects of the three RE identities: composite, `(G,R)`, `(F,Q)`.
    pub fn identity_defects(&self) -> [f64; 3] {
        [
            (self.re_composite - self.h_ab_given_c - self.ln_da - self.ln_db).abs(),
            (self.re_g - self.h_b_given_c - self.ln_db).abs(),
            (self.re_f - self.h_a_given_bc - self.ln_da).abs(),
        ]
    }
}

/// Evaluates both sides of the chain rule and the three RE identities for `ρ_ABC`.
pub fn chain_rule(rho_abc: &State, dims: [usize; 3], tol: Tolerances) -> Result<ChainRule> {
    let [da, db, dc] = dims;
    let (g, f) = chain_rule_pair(rho_abc, dims)?;
    let composite = compose_morphisms(&g, &f)?;
    let rho_bc = reduce_left(rho_abc, da, db * dc)?;
    let finite = |v: ExtendedReal| {
        v.finite().ok_or_else(|| {
            Error::Dimension("chain-rule relative entropy is unexpectedly infinite".into())
        })
    };
    Ok(ChainRule {
        h_ab_given_c: conditional_entropy(rho_abc, da * db, dc, tol)?,
        h_a_given_bc: conditional_entropy(rho_abc, da, db * dc, tol)?,
        h_b_given_c: conditional_entropy(&rho_bc, db, dc, tol)?,
        re_composite: finite(re_functor(&composite, tol)?)?,
        re_g: finite(re_functor(&g, tol)?)?,
        re_f: finite(re_functor(&f, tol)?)?,
        ln_da: (da as f64).ln(),
        ln_db: (db as f64).ln(),
    })
}

fn check_weight(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidWeight(lambda));
    }
    Ok(())
}

fn convex_state(lambda: f64, s: &State, s_bar: &State) -> State {
    let spec = s.spec().direct_sum(s_bar.spec());
    let densities = s
        .densities()
        .iter()
        .map(|d| d.scale(lambda))
        .chain(s_bar.densities().iter().map(|d| d.scale(1.0 - lambda)))
        .collect();
    State::new(spec, densities).expect("direct sum of valid shapes")
}

/// `λ(A, ω) ⊕ λ̄(Ā, ω̄) = (A ⊕ Ā, λω ⊕ λ̄ω̄)`.
pub fn convex_sum_objects(lambda: f64, o: &NcObject, o_bar: &NcObject) -> Result<NcObject> {
    check_weight(lambda)?;
    Ok(NcObject::unchecked(convex_state(
        lambda,
        o.state(),
        o_bar.state(),
    )))
}

/// `λ(F, Q) ⊕ λ̄(F̄, Q̄) = (F ⊕ F̄, Q ⊕ Q̄)` between the convex-sum objects.
pub fn convex_sum_morphisms(lambda: f64, m: &NcMorphism, m_bar: &NcMorphism) -> Result<NcMorphism> {
    check_weight(lambda)?;
    NcMorphism::new(
        convex_sum_objects(lambda, m.source(), m_bar.source())?,
        convex_sum_objects(lambda, m.target(), m_bar.target())?,
        m.hom().direct_sum(m_bar.hom()),
        m.hypothesis().direct_sum(m_bar.hypothesis()),
    )
}

/// Outcome of a functoriality check on a composable pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functoriality {
    /// All three terms finite.
    Finite {
        composite: f64,
        g: f64,
        f: f64,
        defect: f64,
    },
    /// At least one term infinite; additivity is not asserted here.
    Infinite {
        composite: ExtendedReal,
        g: ExtendedReal,
        f: ExtendedReal,
    },
}

/// `|RE(F∘G, R∘Q) − RE(G, R) − RE(F, Q)|` for `g = (G, R)` then `f = (F, Q)`.
pub fn functoriality_defect(g: &NcMorphism, f: &NcMorphism, cutoff: f64) -> Result<Functoriality> {
    let composite = compose_morphisms(g, f)?;
    let re_c = re_unchecked(&composite, cutoff)?;
    let re_g = re_unchecked(g, cutoff)?;
    let re_f = re_unchecked(f, cutoff)?;
    Ok(match (re_c, re_g, re_f) {
        (ExtendedReal::Finite(c), ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
            Functoriality::Finite {
                composite: c,
                g: a,
                f: b,
                defect: (c - a - b).abs(),
            }
        }
        _ => Functoriality::Infinite {
            composite: re_c,
            g: re_g,
            f: re_f,
        },
    })
}

/// One side-by-side comparison of a direct evaluation and its expansion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Expansion {
    pub direct: f64,
    pub expanded: f64,
}

impl Expansion {
    pub fn defect(&self) -> f64 {
        (self.direct - self.expanded).abs()
    }
}

/// The three expansions of a faithful composable pair in standard form.
///
/// With `D_x = p_x ρ_x` the rectified target densities, `Ξ_y = q_y σ_y`,
/// `K_y = q^R_y σ^R_y` the densities of `ζ∘R`, and
///
/// ```text
/// T_α = Σ_{x,y} tr(D_{x;yy} (ln α_yx ⊗ 1))
/// T_ξ = Σ_{x,y} tr(tr_c(D_{x;yy}) ln Ξ_y)
/// T_R = Σ_{x,y} tr(tr_c(D_{x;yy}) ln K_y)
/// ```
///
/// the identities are `S(ω‖ξ∘Q) = −S(ω) − T_α − T_ξ`,
/// `S(ξ‖ζ∘R) = T_ξ − T_R` and `S(ω‖ζ∘R∘Q) = −S(ω) − T_α − T_R`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExpansionReport {
    pub first: Expansion,
    pub middle: Expansion,
    pub composite: Expansion,
    /// `‖ζ∘R∘Q − ⊞_y α_yx ⊗ K_y‖_F` in rectified coordinates.
    pub product_residual: f64,
}

impl ExpansionReport {
    pub fn max_defect(&self) -> f64 {
        self.first
            .defect()
            .max(self.middle.defect())
            .max(self.composite.defect())
    }
}

/// Recomputes each relative entropy of the pair `g` then `f` from `α`,
/// segments and pushforwards, next to its direct value.
///
/// Needs faithful states and a hypothesis `Q` of disintegration form.
pub fn expansion_identities(g: &NcMorphism, f: &NcMorphism, tol: Tolerances) -> Result<ExpansionReport> {
    let finite = |v: ExtendedReal, what: &str| {
        v.finite()
            .ok_or_else(|| Error::Dimension(format!("{what} is infinite; expansions need finite terms")))
    };
    let direct_first = finite(re_unchecked(f, tol.cutoff)?, "RE(F,Q)")?;
    let direct_middle = finite(re_unchecked(g, tol.cutoff)?, "RE(G,R)")?;
    let composite = compose_morphisms(g, f)?;
    let direct_composite = finite(re_unchecked(&composite, tol.cutoff)?, "RE(F∘G,R∘Q)")?;

    let pair = rectify_pair(g, f)?;
    let fs = &pair.f;
    let alphas = extract_alphas(fs, tol.atol)?;
    let omega = fs.target().state();
    let xi = fs.source().state();
    let k = pair.g.predicted_state()?;
    let layout = fs.hom().layout();
    let neg_s = neg_entropy(&eigs(omega)?, tol.cutoff);

    let log_xi: Vec<CMat> = xi
        .densities()
        .iter()
        .map(|d| hermitian_log(d, tol.cutoff))
        .collect::<Result<_>>()?;
    let log_k: Vec<CMat> = k
        .densities()
        .iter()
        .map(|d| hermitian_log(d, tol.cutoff))
        .collect::<Result<_>>()?;

    let (mut t_alpha, mut t_xi, mut t_r) = (0.0, 0.0, 0.0);
    for (x, d) in omega.densities().iter().enumerate() {
        for (y, &n) in fs.source().algebra().blocks().iter().enumerate() {
            let c = fs.hom().multiplicity(y, x);
            if c == 0 {
                continue;
            }
            let seg = layout.extract(d, x, y, y);
            let log_alpha = hermitian_log(alphas.get(y, x), tol.cutoff)?;
            t_alpha += (&seg * log_alpha.kronecker(&CMat::identity(n, n))).trace().re;
            let reduced = partial_trace_left(&seg, c, n)?;
            t_xi += (&reduced * &log_xi[y]).trace().re;
            t_r += (&reduced * &log_k[y]).trace().re;
        }
    }

    let predicted = fs.hypothesis().pullback_state(&k)?;
    let product = crate::hypotheses::disintegration_state(fs.hom(), &k, &alphas)?;
    Ok(ExpansionReport {
        first: Expansion {
            direct: direct_first,
            expanded: neg_s - t_alpha - t_xi,
        },
        middle: Expansion {
            direct: direct_middle,
            expanded: t_xi - t_r,
        },
        composite: Expansion {
            direct: direct_composite,
            expanded: neg_s - t_alpha - t_r,
        },
        product_residual: predicted.distance(&product),
    })
}
