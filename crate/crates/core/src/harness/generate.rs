use rand::Rng;
use rand_distr::StandardNormal;

use super::GeneratorConfig;
use crate::algebra::{hermitian_eigen, AlgebraSpec, CMat, State, C64};
use crate::hypotheses::{hypothesis_from_alphas, AlphaFamily, NcMorphism, NcObject};
use crate::maps::StarHom;

/// Smallest eigenvalue ratio `λ_min/λ_max` of faithful generated states.
const FAITHFUL_FLOOR: f64 = 1e-3;
/// Mixing target, a margin above [`FAITHFUL_FLOOR`].
const MIX_TARGET: f64 = 2e-3;

/// Matrix of i.i.d. standard complex Gaussians (real and imaginary parts N(0, 1/2)).
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-random unitary: QR of a complex Gaussian with the phases of `diag(R)`
/// moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|e| *e *= phase);
    }
    q
}

pub fn random_spec<R: Rng + ?Sized>(cfg: &GeneratorConfig, rng: &mut R) -> AlgebraSpec {
    let k = rng.random_range(1..=cfg.max_blocks);
    let blocks = (0..k).map(|_| rng.random_range(1..=cfg.max_block_dim)).collect();
    AlgebraSpec::new(blocks).expect("positive block sizes")
}

/// A random state on `algebra`.
///
/// Faithful mode draws `G G†` per block from full-rank Gaussians and mixes
/// with the maximally mixed state until `λ_min ≥ 10⁻³ λ_max`. Otherwise each
/// block gets a Gaussian of random rank, possibly zero.
pub fn gen_state<R: Rng + ?Sized>(cfg: &GeneratorConfig, algebra: &AlgebraSpec, rng: &mut R) -> State {
    let faithful = cfg.faithful_only;
    let mut densities: Vec<CMat> = algebra
        .blocks()
        .iter()
        .map(|&m| {
            let rank = if faithful { m } else { rng.random_range(0..=m) };
            let g = gaussian_matrix(rng, m, rank);
            &g * g.adjoint()
        })
        .collect();
    let mut total: f64 = densities.iter().map(|d| d.trace().re).sum();
    if total <= 0.0 {
        let m = algebra.block_dim(0);
        let g = gaussian_matrix(rng, m, 1);
        densities[0] = &g * g.adjoint();
        total = densities[0].trace().re;
    }
    for d in &mut densities {
        *d = d.unscale(total);
    }
    if faithful {
        let spectra: Vec<f64> = densities
            .iter()
            .flat_map(|d| hermitian_eigen(d).expect("Hermitian by construction").eigenvalues)
            .collect();
        let min = spectra.iter().copied().fold(f64::INFINITY, f64::min);
        let max = spectra.iter().copied().fold(0.0, f64::max);
        if min < FAITHFUL_FLOOR * max {
            let inv_side = 1.0 / algebra.side() as f64;
            let t = (MIX_TARGET * max - min) / ((1.0 - MIX_TARGET) * inv_side - min + MIX_TARGET * max);
            for d in &mut densities {
                let n = d.nrows();
                *d = d.scale(1.0 - t) + CMat::identity(n, n).scale(t * inv_side);
            }
        }
    }
    for d in &mut densities {
        *d = (d.clone() + d.adjoint()).scale(0.5);
    }
    State::new(algebra.clone(), densities).expect("shapes from algebra")
}

/// All nonzero columns `c ∈ ℕ^{|Y|}` with `Σ_y c_y n_y ≤ max_dim`.
fn candidate_columns(source: &AlgebraSpec, max_dim: usize) -> Vec<Vec<usize>> {
    fn walk(dims: &[usize], budget: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dims.len() {
            if prefix.iter().any(|&c| c > 0) {
                out.push(prefix.clone());
            }
            return;
        }
        let n = dims[prefix.len()];
        for c in 0..=budget / n {
            prefix.push(c);
            walk(dims, budget - c * n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    walk(source.blocks(), max_dim, &mut Vec::new(), &mut out);
    out
}

/// A target algebra and multiplicities `c[y][x]` for an injective unital
/// *-homomorphism out of `source`, or `None` if the draw fails to cover
/// every source block.
pub fn random_extension<R: Rng + ?Sized>(
    source: &AlgebraSpec,
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Option<(AlgebraSpec, Vec<Vec<usize>>)> {
    let candidates = candidate_columns(source, cfg.max_block_dim);
    if candidates.is_empty() {
        return None;
    }
    let t = rng.random_range(1..=cfg.max_blocks);
    let columns: Vec<&Vec<usize>> = (0..t)
        .map(|_| &candidates[rng.random_range(0..candidates.len())])
        .collect();
    let ny = source.block_count();
    if (0..ny).any(|y| columns.iter().all(|col| col[y] == 0)) {
        return None;
    }
    let target_blocks = columns
        .iter()
        .map(|col| col.iter().zip(source.blocks()).map(|(c, n)| c * n).sum())
        .collect();
    let mult = (0..ny).map(|y| columns.iter().map(|col| col[y]).collect()).collect();
    Some((AlgebraSpec::new(target_blocks).ok()?, mult))
}

/// A random injective *-homomorphism out of `source` with Haar-random conjugators.
pub fn gen_hom<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    source: &AlgebraSpec,
    rng: &mut R,
) -> Option<StarHom> {
    let (target, mult) = random_extension(source, cfg, rng)?;
    let conjugators = target.blocks().iter().map(|&m| haar_unitary(rng, m)).collect();
    StarHom::new(source.clone(), target, mult, conjugators, 1e-10).ok()
}

/// Random `α_yx`, normalized so that `Σ_x tr(α_yx) = 1`.
///
/// Faithful families are strictly positive with a spectral floor; otherwise
/// each `α_yx` has random rank (at least one nonzero per `y`).
pub fn random_alphas<R: Rng + ?Sized>(f: &StarHom, faithful: bool, rng: &mut R) -> AlphaFamily {
    let grid = f
        .multiplicities()
        .iter()
        .map(|row| {
            let mut alphas: Vec<CMat> = row
                .iter()
                .map(|&c| {
                    let rank = if faithful { c } else { rng.random_range(0..=c) };
                    let g = gaussian_matrix(rng, c, rank);
                    let mut a = &g * g.adjoint();
                    if faithful && c > 0 {
                        let w = a.trace().re / c as f64;
                        a += CMat::identity(c, c).scale(0.05 * w.max(1e-3) + 1e-3);
                    }
                    a
                })
                .collect();
            let mut total: f64 = alphas.iter().map(|a| a.trace().re).sum();
            if total <= 0.0 {
                let x = row.iter().position(|&c| c > 0).expect("injective hom");
                let c = row[x];
                alphas[x] = CMat::identity(c, c);
                total = c as f64;
            }
            alphas.into_iter().map(|a| a.unscale(total)).collect()
        })
        .collect();
    AlphaFamily::new(f, grid).expect("shapes follow multiplicities")
}

/// A probability vector of length `n`; zeros allowed unless `faithful`.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, faithful: bool, rng: &mut R) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            let v = g * g + if faithful { 1e-3 } else { 0.0 };
            if !faithful && rng.random_bool(0.3) {
                0.0
            } else {
                v
            }
        })
        .collect();
    let mut total: f64 = p.iter().sum();
    if total <= 0.0 {
        p[0] = 1.0;
        total = 1.0;
    }
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// A composable pair `(C, ζ) --g--> (B, ξ) --f--> (A, ω)`.
#[derive(Debug, Clone)]
pub struct ComposablePair {
    pub g: NcMorphism,
    pub f: NcMorphism,
}

/// Samples algebras, multiplicities and Haar conjugators, a state `ω` on `A`,
/// then `ξ = ω∘F`, `ζ = ξ∘G`, and hypotheses `Q`, `R` of disintegration form
/// with random `α`. `ω` and `ξ` are independent of `ξ∘Q`, `ζ∘R`, so the
/// relative entropies are generically positive.
pub fn gen_composable_pair<R: Rng + ?Sized>(cfg: &GeneratorConfig, rng: &mut R) -> ComposablePair {
    loop {
        let c_spec = random_spec(cfg, rng);
        let Some(g_hom) = gen_hom(cfg, &c_spec, rng) else {
            continue;
        };
        let Some(f_hom) = gen_hom(cfg, g_hom.target(), rng) else {
            continue;
        };
        let omega = gen_state(cfg, f_hom.target(), rng);
        let xi = f_hom.pushforward(&omega).expect("target state on A");
        let zeta = g_hom.pushforward(&xi).expect("state on B");
        let q = hypothesis_from_alphas(&f_hom, &random_alphas(&f_hom, cfg.faithful_only, rng))
            .expect("alphas shaped by F");
        let r = hypothesis_from_alphas(&g_hom, &random_alphas(&g_hom, cfg.faithful_only, rng))
            .expect("alphas shaped by G");
        let f = NcMorphism::new(
            NcObject::unchecked(xi.clone()),
            NcObject::unchecked(omega),
            f_hom,
            q,
        )
        .expect("shapes agree");
        let g = NcMorphism::new(NcObject::unchecked(zeta), NcObject::unchecked(xi), g_hom, r)
            .expect("shapes agree");
        return ComposablePair { g, f };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trial_rng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = trial_rng(7, 0);
        for n in 1..5 {
            let u = haar_unitary(&mut rng, n);
            assert!((u.adjoint() * &u - CMat::identity(n, n)).norm() < 1e-13);
        }
    }

    #[test]
    fn faithful_states_respect_floor() {
        let cfg = GeneratorConfig::default();
        let mut rng = trial_rng(3, 1);
        for _ in 0..50 {
            let spec = random_spec(&cfg, &mut rng);
            let s = gen_state(&cfg, &spec, &mut rng);
            assert!(s.validate(1e-9).is_valid());
            let e: Vec<f64> = s
                .densities()
                .iter()
                .flat_map(|d| hermitian_eigen(d).unwrap().eigenvalues)
                .collect();
            let min = e.iter().copied().fold(f64::INFINITY, f64::min);
            let max = e.iter().copied().fold(0.0, f64::max);
            assert!(min >= FAITHFUL_FLOOR * max, "{min} {max}");
        }
    }

    #[test]
    fn non_faithful_states_validate() {
        let cfg = GeneratorConfig {
            faithful_only: false,
            ..Default::default()
        };
        let mut rng = trial_rng(5, 2);
        let mut saw_singular = false;
        for _ in 0..50 {
            let spec = random_spec(&cfg, &mut rng);
            let s = gen_state(&cfg, &spec, &mut rng);
            let r = s.validate(1e-9);
            assert!(r.is_valid(), "{r}");
            saw_singular |= r.faithful == Some(false);
        }
        assert!(saw_singular);
    }

    #[test]
    fn state_generation_is_deterministic() {
        let cfg = GeneratorConfig::default();
        let spec = AlgebraSpec::new(vec![2, 3]).unwrap();
        let a = gen_state(&cfg, &spec, &mut trial_rng(11, 4));
        let b = gen_state(&cfg, &spec, &mut trial_rng(11, 4));
        assert_eq!(a, b);
    }

    #[test]
    fn extensions_are_unital_and_bounded() {
        let cfg = GeneratorConfig::default();
        let mut rng = trial_rng(9, 0);
        for _ in 0..100 {
            let spec = random_spec(&cfg, &mut rng);
            if let Some(f) = gen_hom(&cfg, &spec, &mut rng) {
                assert!(f.target().blocks().iter().all(|&m| m <= cfg.max_block_dim));
                assert!(f.target().block_count() <= cfg.max_blocks);
                for y in 0..spec.block_count() {
                    assert!(f.multiplicities()[y].iter().any(|&c| c > 0));
                }
            }
        }
    }

    #[test]
    fn alphas_are_normalized() {
        let cfg = GeneratorConfig::default();
        let mut rng = trial_rng(1, 3);
        for faithful in [true, false] {
            for _ in 0..30 {
                let spec = random_spec(&cfg, &mut rng);
                let Some(f) = gen_hom(&cfg, &spec, &mut rng) else {
                    continue;
                };
                let a = random_alphas(&f, faithful, &mut rng);
                assert!(a.check(1e-12).is_ok());
            }
        }
    }

    #[test]
    fn distributions_sum_to_one() {
        let mut rng = trial_rng(2, 2);
        for n in 1..6 {
            for faithful in [true, false] {
                let p = random_distribution(n, faithful, &mut rng);
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                if faithful {
                    assert!(p.iter().all(|&v| v > 0.0));
                }
            }
        }
    }
}
