use ncstat_core::algebra::{
    absolutely_continuous, hermitian_eigen, hermitian_exp, hermitian_log, partial_trace_left,
    partial_trace_right, support_projection, AlgebraElement, CMat,
};
use ncstat_core::harness::{
    gaussian_matrix, gen_composable_pair, gen_hom, gen_state, haar_unitary, random_spec,
    trial_rng, GeneratorConfig,
};
use ncstat_core::maps::{apply_cpu, apply_hom, compose_homs, hom_from_raw, validate_cpu};
use ncstat_core::StarHom;
use proptest::prelude::*;
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    trial_rng(seed, 0)
}

fn element(spec: &ncstat_core::AlgebraSpec, r: &mut ChaCha20Rng) -> AlgebraElement {
    let blocks = spec
        .blocks()
        .iter()
        .map(|&m| gaussian_matrix(r, m, m))
        .collect();
    AlgebraElement::new(spec.clone(), blocks).unwrap()
}

fn hom(seed: u64) -> StarHom {
    let cfg = GeneratorConfig::default();
    let r = &mut rng(seed);
    loop {
        let spec = random_spec(&cfg, r);
        if let Some(f) = gen_hom(&cfg, &spec, r) {
            return f;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hom_is_multiplicative_star_and_unital(seed in any::<u64>()) {
        let f = hom(seed);
        let r = &mut rng(seed ^ 1);
        let (a, b) = (element(f.source(), r), element(f.source(), r));
        let fa = apply_hom(&f, &a).unwrap();
        let fb = apply_hom(&f, &b).unwrap();
        prop_assert!(apply_hom(&f, &a.mul(&b).unwrap()).unwrap().distance(&fa.mul(&fb).unwrap()) < 1e-10);
        prop_assert!(apply_hom(&f, &a.adjoint()).unwrap().distance(&fa.adjoint()) < 1e-10);
        let one = AlgebraElement::identity(f.source());
        prop_assert!(apply_hom(&f, &one).unwrap().distance(&AlgebraElement::identity(f.target())) < 1e-12);
    }

    #[test]
    fn raw_roundtrip_matches_on_matrix_units(seed in any::<u64>()) {
        let f = hom(seed);
        let back = hom_from_raw(&f.to_raw(), 1e-9).unwrap();
        prop_assert_eq!(back.multiplicities(), f.multiplicities());
        for e in AlgebraElement::matrix_units(f.source()) {
            prop_assert!(back.apply(&e).unwrap().distance(&f.apply(&e).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn composition_is_associative_with_neutral_identity(seed in any::<u64>()) {
        let cfg = GeneratorConfig::default();
        let p = gen_composable_pair(&cfg, &mut rng(seed));
        let (g, f) = (p.g.hom(), p.f.hom());
        let c = g.source();
        let h = StarHom::new(
            c.clone(),
            c.clone(),
            StarHom::identity(c).multiplicities().to_vec(),
            c.blocks().iter().map(|&m| haar_unitary(&mut rng(seed ^ 2), m)).collect(),
            1e-10,
        )
        .unwrap();
        let left = compose_homs(&compose_homs(f, g).unwrap(), &h).unwrap();
        let right = compose_homs(f, &compose_homs(g, &h).unwrap()).unwrap();
        let x = element(c, &mut rng(seed ^ 3));
        prop_assert!(left.apply(&x).unwrap().distance(&right.apply(&x).unwrap()) < 1e-10);
        let id = compose_homs(f, &StarHom::identity(f.source())).unwrap();
        let y = element(f.source(), &mut rng(seed ^ 4));
        prop_assert!(id.apply(&y).unwrap().distance(&f.apply(&y).unwrap()) < 1e-10);
    }

    #[test]
    fn cpu_maps_preserve_positivity(seed in any::<u64>()) {
        let cfg = GeneratorConfig { faithful_only: seed % 2 == 0, ..Default::default() };
        let p = gen_composable_pair(&cfg, &mut rng(seed));
        let r = &mut rng(seed ^ 5);
        for m in [&p.g, &p.f] {
            let q = m.hypothesis();
            prop_assert!(validate_cpu(q, 1e-9).is_valid());
            let blocks = q.source().blocks().iter().map(|&k| {
                let g = gaussian_matrix(r, k, k);
                &g * g.adjoint()
            }).collect();
            let out = apply_cpu(q, &AlgebraElement::new(q.source().clone(), blocks).unwrap()).unwrap();
            for b in out.blocks() {
                let h = (b + b.adjoint()).scale(0.5);
                prop_assert!(hermitian_eigen(&h).unwrap().min_eigenvalue() >= -1e-9);
            }
        }
    }

    #[test]
    fn partial_traces_preserve_trace(a in 1usize..4, b in 1usize..4, seed in any::<u64>()) {
        let t = gaussian_matrix(&mut rng(seed), a * b, a * b);
        let tr = t.trace();
        let scale = tr.norm().max(1.0);
        prop_assert!((partial_trace_left(&t, a, b).unwrap().trace() - tr).norm() <= 1e-10 * scale);
        prop_assert!((partial_trace_right(&t, a, b).unwrap().trace() - tr).norm() <= 1e-10 * scale);
    }

    #[test]
    fn log_inverts_exp(n in 1usize..6, seed in any::<u64>()) {
        let g = gaussian_matrix(&mut rng(seed), n, n);
        let h = (&g + g.adjoint()).scale(0.5);
        let back = hermitian_log(&hermitian_exp(&h).unwrap(), 0.0).unwrap();
        prop_assert!((back - &h).norm() <= 1e-8 * h.norm().max(1.0));
    }

    #[test]
    fn support_projection_is_an_orthogonal_projection(n in 1usize..6, rank in 0usize..6, seed in any::<u64>()) {
        let g = gaussian_matrix(&mut rng(seed), n, rank.min(n));
        let m: CMat = &g * g.adjoint();
        let p = support_projection(&m, 1e-10).unwrap();
        prop_assert!((&p * &p - &p).norm() < 1e-9);
        prop_assert!((&p - p.adjoint()).norm() < 1e-9);
        prop_assert!((&p * &m * &p - &m).norm() <= 1e-9 * m.norm().max(1.0));
        let r = p.trace().re.round() as usize;
        prop_assert_eq!(r, rank.min(n));
    }

    #[test]
    fn absolute_continuity_is_reflexive_and_transitive(seed in any::<u64>()) {
        let cfg = GeneratorConfig { faithful_only: false, ..Default::default() };
        let r = &mut rng(seed);
        let spec = random_spec(&cfg, r);
        let s: Vec<_> = (0..3).map(|_| gen_state(&cfg, &spec, r)).collect();
        let ac = |i: usize, j: usize| absolutely_continuous(&s[i], &s[j], 1e-10).unwrap();
        for i in 0..3 {
            prop_assert!(ac(i, i));
        }
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1)] {
            prop_assert!(!(ac(i, j) && ac(j, k)) || ac(i, k));
        }
    }

    #[test]
    fn generated_pairs_validate(seed in any::<u64>(), faithful in any::<bool>()) {
        let cfg = GeneratorConfig { faithful_only: faithful, ..Default::default() };
        let p = gen_composable_pair(&cfg, &mut rng(seed));
        prop_assert!(p.g.validate(1e-9).is_valid());
        prop_assert!(p.f.validate(1e-9).is_valid());
        prop_assert!(p.f.left_inverse_residual() <= 1e-10);
        prop_assert!(p.g.left_inverse_residual() <= 1e-10);
    }
}
