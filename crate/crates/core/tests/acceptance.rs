//! Acceptance run: ten criteria, one PASS/FAIL line each. Exits nonzero if
//! any criterion fails.

use std::time::{Duration, Instant};

use ncstat_core::algebra::{AlgebraSpec, CMat, State, C64};
use ncstat_core::entropy::{
    chain_rule, chain_rule_pair, convex_sum_morphisms, expansion_identities,
    functoriality_defect, re_functor, relative_entropy, Functoriality,
};
use ncstat_core::harness::{
    gen_composable_pair, gen_hom, gen_state, random_alphas, random_distribution, random_spec,
    run_laws, trial_rng, ComposablePair, GeneratorConfig,
};
use ncstat_core::hypotheses::{
    build_hypothesis_from_alphas, compose_morphisms, extract_alphas, rectify_morphism,
};
use ncstat_core::{ExtendedReal, NcMorphism, Tolerances};

const SEED: u64 = 42;
const TOL: Tolerances = Tolerances {
    atol: 1e-9,
    cutoff: 1e-10,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cfg() -> GeneratorConfig {
    GeneratorConfig {
        seed: SEED,
        ..Default::default()
    }
}

fn pairs(n: usize) -> Vec<ComposablePair> {
    let cfg = cfg();
    (0..n)
        .map(|i| gen_composable_pair(&cfg, &mut trial_rng(SEED, i as u64)))
        .collect()
}

fn finite(v: ExtendedReal) -> f64 {
    v.finite().unwrap_or(f64::INFINITY)
}

fn re(m: &NcMorphism) -> ExtendedReal {
    re_functor(m, TOL).expect("valid morphism")
}

fn functoriality() -> Outcome {
    let start = Instant::now();
    let cfg = cfg();
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let p = gen_composable_pair(&cfg, &mut trial_rng(SEED, i));
        worst = worst.max(match functoriality_defect(&p.g, &p.f, TOL.cutoff).unwrap() {
            Functoriality::Finite { defect, .. } => defect,
            Functoriality::Infinite { .. } => f64::INFINITY,
        });
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed <= Duration::from_secs(30),
        format!("max defect {worst:.3e} over 200 pairs in {:.2} s", elapsed.as_secs_f64()),
    )
}

fn expansions(pairs: &[ComposablePair]) -> Outcome {
    let mut worst = [0.0f64; 3];
    for p in pairs {
        let e = expansion_identities(&p.g, &p.f, TOL).unwrap();
        for (w, d) in worst
            .iter_mut()
            .zip([e.first.defect(), e.middle.defect(), e.composite.defect()])
        {
            *w = w.max(d);
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-8),
        format!(
            "max defects {:.3e} / {:.3e} / {:.3e} (first, middle, composite)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn optimal_morphisms(n: usize) -> Vec<NcMorphism> {
    let cfg = cfg();
    let mut out = Vec::with_capacity(n);
    let mut stream = 10_000;
    while out.len() < n {
        let rng = &mut trial_rng(SEED, stream);
        stream += 1;
        let spec = random_spec(&cfg, rng);
        let Some(f) = gen_hom(&cfg, &spec, rng) else {
            continue;
        };
        let xi = gen_state(&cfg, &spec, rng);
        let alphas = random_alphas(&f, true, rng);
        out.push(build_hypothesis_from_alphas(&f, &xi, &alphas, TOL.atol).unwrap());
    }
    out
}

fn vanishing(optimal: &[NcMorphism]) -> Outcome {
    let worst = optimal.iter().map(|m| finite(re(m))).fold(0.0, f64::max);
    let all_optimal = optimal.iter().all(|m| m.is_optimal(TOL.atol).0);
    outcome(
        worst <= 1e-9 && all_optimal,
        format!("max RE {worst:.3e} over {} optimal morphisms", optimal.len()),
    )
}

fn standard_form(pairs: &[ComposablePair]) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in pairs {
        let rect = rectify_morphism(&p.f).morphism;
        worst = worst.max((finite(re(&p.f)) - finite(re(&rect))).abs());
    }
    outcome(
        worst <= 1e-9,
        format!("max |RE − RE(rectified)| {worst:.3e} over {} morphisms", pairs.len()),
    )
}

fn affinity(pairs: &[ComposablePair]) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in pairs.iter().take(50) {
        let (a, b) = (finite(re(&p.f)), finite(re(&p.g)));
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let sum = convex_sum_morphisms(lambda, &p.f, &p.g).unwrap();
            let v = finite(re(&sum));
            worst = worst.max((v - lambda * a - (1.0 - lambda) * b).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max defect {worst:.3e} over 50 pairs × 5 weights"))
}

fn basis_state(amplitudes: &[(usize, f64)], n: usize) -> State {
    let mut v = CMat::zeros(n, 1);
    for &(i, a) in amplitudes {
        v[(i, 0)] = C64::new(a, 0.0);
    }
    State::new(AlgebraSpec::full(n).unwrap(), vec![&v * v.adjoint()]).unwrap()
}

/// `S(ρ ‖ 1/8)` straight from nalgebra's eigensolver.
fn relative_entropy_to_uniform(rho: &CMat) -> f64 {
    let n = rho.nrows() as f64;
    rho.clone()
        .symmetric_eigenvalues()
        .iter()
        .filter(|&&l| l > 1e-14)
        .map(|&l| l * (l * n).ln())
        .sum()
}

fn chain_rule_criterion() -> Outcome {
    let cfg = cfg();
    let spec = AlgebraSpec::full(8).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let rho = gen_state(&cfg, &spec, &mut trial_rng(SEED, 20_000 + i));
        let cr = chain_rule(&rho, [2, 2, 2], TOL).unwrap();
        worst = cr
            .identity_defects()
            .into_iter()
            .fold(worst.max(cr.chain_rule_defect()), f64::max);
    }

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ghz = basis_state(&[(0, s), (7, s)], 8);
    let (g, f) = chain_rule_pair(&ghz, [2, 2, 2]).unwrap();
    let total = finite(re(&compose_morphisms(&g, &f).unwrap()));
    let oracle = relative_entropy_to_uniform(ghz.density(0));
    let ghz_defect = (total - 3.0 * 2f64.ln()).abs().max((total - oracle).abs());

    let mixed = State::maximally_mixed(&spec);
    let (g, f) = chain_rule_pair(&mixed, [2, 2, 2]).unwrap();
    let composite = compose_morphisms(&g, &f).unwrap();
    let mixed_max = [&g, &f, &composite]
        .iter()
        .map(|m| finite(re(m)).abs())
        .fold(0.0, f64::max);

    outcome(
        worst <= 1e-9 && ghz_defect <= 1e-9 && mixed_max <= 1e-10,
        format!(
            "50 states max defect {worst:.3e}; GHZ RE {total:.12} (defect {ghz_defect:.1e}); \
             maximally mixed max |RE| {mixed_max:.1e}"
        ),
    )
}

fn classical() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let rng = &mut trial_rng(SEED, 30_000 + i);
        let n = 1 + (i as usize % 6);
        let p = random_distribution(n, true, rng);
        let q = random_distribution(n, true, rng);
        let oracle: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();
        let v = relative_entropy(
            &State::classical(&p).unwrap(),
            &State::classical(&q).unwrap(),
            TOL.cutoff,
        )
        .unwrap();
        worst = worst.max((finite(v) - oracle).abs());
    }
    let spot = finite(
        relative_entropy(
            &State::classical(&[0.5, 0.5]).unwrap(),
            &State::classical(&[0.75, 0.25]).unwrap(),
            TOL.cutoff,
        )
        .unwrap(),
    );
    let expected = 0.5 * (4.0f64 / 3.0).ln();
    outcome(
        worst <= 1e-12 && (spot - expected).abs() <= 1e-12 && (spot - 0.143841).abs() < 5e-7,
        format!("max |S − KL| {worst:.3e} over 100 pairs; KL((½,½)‖(¾,¼)) = {spot:.12}"),
    )
}

fn infinite_branch() -> Outcome {
    let report = run_laws(&GeneratorConfig {
        seed: SEED,
        faithful_only: false,
        ..Default::default()
    })
    .unwrap();
    let hits = report.law("infinite-coverage").map_or(0, |l| l.infinite);
    let mixed = State::maximally_mixed(&AlgebraSpec::full(2).unwrap());
    let pure = basis_state(&[(0, 1.0)], 2);
    let v = relative_entropy(&mixed, &pure, TOL.cutoff).unwrap();
    outcome(
        hits >= 1 && v == ExtendedReal::Infinite,
        format!("{hits} generated instances hit ∞; S(mixed ‖ pure) = {v}"),
    )
}

fn nonnegativity(pairs: &[ComposablePair], optimal: &[NcMorphism]) -> Outcome {
    let mut min = f64::INFINITY;
    let mut count = 0;
    for p in pairs {
        let composite = compose_morphisms(&p.g, &p.f).unwrap();
        let rect = rectify_morphism(&p.f).morphism;
        for m in [&p.g, &p.f, &composite, &rect] {
            min = min.min(finite(re(m)));
            count += 1;
        }
    }
    for m in optimal {
        min = min.min(finite(re(m)));
        count += 1;
    }
    let driver = run_laws(&GeneratorConfig {
        seed: SEED,
        faithful_only: false,
        ..Default::default()
    })
    .unwrap();
    let driver_ok = driver.law("nonnegativity").is_some_and(|l| l.ok());
    outcome(
        min >= -1e-10 && driver_ok,
        format!("min RE {min:.3e} over {count} morphisms; mixed-mode driver nonnegativity ok: {driver_ok}"),
    )
}

fn roundtrip() -> Outcome {
    let cfg = cfg();
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut stream = 40_000;
    while done < 100 {
        let rng = &mut trial_rng(SEED, stream);
        stream += 1;
        let spec = random_spec(&cfg, rng);
        let Some(f) = gen_hom(&cfg, &spec, rng) else {
            continue;
        };
        let f = f.standardized();
        let xi = gen_state(&cfg, &spec, rng);
        let alphas = random_alphas(&f, true, rng);
        let m = build_hypothesis_from_alphas(&f, &xi, &alphas, TOL.atol).unwrap();
        worst = worst.max(extract_alphas(&m, TOL.atol).unwrap().distance(&alphas));
        done += 1;
    }
    outcome(worst <= 1e-10, format!("max ‖α − α'‖ {worst:.3e} over 100 families"))
}

fn main() {
    let pairs = pairs(200);
    let optimal = optimal_morphisms(200);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("functoriality", Box::new(functoriality)),
        ("expansion identities", Box::new(|| expansions(&pairs))),
        ("vanishing on optimal morphisms", Box::new(|| vanishing(&optimal))),
        ("standard-form invariance", Box::new(|| standard_form(&pairs))),
        ("affinity", Box::new(|| affinity(&pairs))),
        ("chain rule", Box::new(chain_rule_criterion)),
        ("classical reduction", Box::new(classical)),
        ("infinite branch", Box::new(infinite_branch)),
        ("nonnegativity", Box::new(|| nonnegativity(&pairs, &optimal))),
        ("disintegration round trip", Box::new(roundtrip)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
