//! The property-law driver.
//!
//! Each trial draws one composable pair plus a handful of auxiliary
//! instances from its own RNG stream and measures every law on them. Trials
//! are independent, so [`run_laws_parallel`] and [`run_laws_sequential`]
//! produce identical reports.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generate::{
    gaussian_matrix, gen_composable_pair, gen_state, haar_unitary, random_alphas,
    random_distribution, random_spec,
};
use super::{trial_rng, GeneratorConfig};
use crate::algebra::{
    absolutely_continuous, hermitian_eigen, hermitian_exp, hermitian_log, partial_trace_left,
    partial_trace_right, support_projection, AlgebraElement, AlgebraSpec, CMat, State,
};
use crate::entropy::{
    chain_rule, convex_sum_morphisms, expansion_identities, functoriality_defect,
    relative_entropy, re_unchecked, ExtendedReal, Functoriality,
};
use crate::error::Result;
use crate::hypotheses::{
    build_hypothesis_from_alphas, compose_morphisms, extract_alphas, rectify_morphism,
    AlphaFamily, NcMorphism,
};
use crate::maps::StarHom;

/// How a law's per-instance defect is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// Pass iff `defect ≤ tol`.
    AtMost(f64),
    /// Pass/fail property, defect 0 or 1.
    Exact,
}

impl Tolerance {
    fn accepts(self, defect: f64) -> bool {
        match self {
            Tolerance::AtMost(tol) => defect <= tol,
            Tolerance::Exact => defect == 0.0,
        }
    }
}

const FUNCTORIALITY: usize = 0;
const EXPANSION_FIRST: usize = 1;
const EXPANSION_MIDDLE: usize = 2;
const EXPANSION_COMPOSITE: usize = 3;
const PRODUCT_FORM: usize = 4;
const PUSHFORWARD: usize = 5;
const VANISHING: usize = 6;
const STANDARD_FORM: usize = 7;
const RECTIFY_VALIDITY: usize = 8;
const AFFINITY: usize = 9;
const CHAIN_RULE: usize = 10;
const CLASSICAL_KL: usize = 11;
const NONNEGATIVITY: usize = 12;
const ROUNDTRIP: usize = 13;
const SOUNDNESS: usize = 14;
const CLOSURE: usize = 15;
const HOM_LAWS: usize = 16;
const RAW_ROUNDTRIP: usize = 17;
const CPU_POSITIVITY: usize = 18;
const PARTIAL_TRACE: usize = 19;
const LOG_EXP: usize = 20;
const SUPPORT_PROJECTION: usize = 21;
const ABSOLUTE_CONTINUITY: usize = 22;
const INFINITE_COVERAGE: usize = 23;

/// Every law the driver checks, in report order.
pub const LAWS: &[(&str, Tolerance)] = &[
    ("functoriality", Tolerance::AtMost(1e-8)),
    ("expansion-first", Tolerance::AtMost(1e-8)),
    ("expansion-middle", Tolerance::AtMost(1e-8)),
    ("expansion-composite", Tolerance::AtMost(1e-8)),
    ("product-form", Tolerance::AtMost(1e-9)),
    ("pushforward-definition", Tolerance::AtMost(1e-10)),
    ("vanishing", Tolerance::AtMost(1e-9)),
    ("standard-form-invariance", Tolerance::AtMost(1e-9)),
    ("rectify-preserves-validity", Tolerance::Exact),
    ("affinity", Tolerance::AtMost(1e-9)),
    ("chain-rule", Tolerance::AtMost(1e-9)),
    ("classical-kl", Tolerance::AtMost(1e-12)),
    ("nonnegativity", Tolerance::AtMost(1e-10)),
    ("disintegration-roundtrip", Tolerance::AtMost(1e-10)),
    ("generator-soundness", Tolerance::Exact),
    ("category-closure", Tolerance::Exact),
    ("hom-laws", Tolerance::AtMost(1e-10)),
    ("raw-roundtrip", Tolerance::AtMost(1e-10)),
    ("cpu-positivity", Tolerance::AtMost(1e-9)),
    ("partial-trace", Tolerance::AtMost(1e-10)),
    ("log-exp-roundtrip", Tolerance::AtMost(1e-8)),
    ("support-projection", Tolerance::AtMost(1e-9)),
    ("absolute-continuity", Tolerance::Exact),
    ("infinite-coverage", Tolerance::Exact),
];

const AFFINITY_WEIGHTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Aggregate result for one law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawOutcome {
    pub name: String,
    pub tolerance: Tolerance,
    /// Number of measured instances.
    pub checked: usize,
    pub passed: usize,
    pub max_defect: f64,
    /// Trial indices with at least one failing instance.
    pub failing_trials: Vec<usize>,
    /// Instances that landed in the infinite regime (logged, not asserted).
    pub infinite: usize,
    /// Trials in which the law did not apply.
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_error: Option<String>,
}

impl LawOutcome {
    pub fn ok(&self) -> bool {
        self.failing_trials.is_empty() && self.passed == self.checked
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub config: GeneratorConfig,
    pub laws: Vec<LawOutcome>,
}

impl LawReport {
    pub fn ok(&self) -> bool {
        self.laws.iter().all(LawOutcome::ok)
    }

    pub fn law(&self, name: &str) -> Option<&LawOutcome> {
        self.laws.iter().find(|l| l.name == name)
    }

    /// Trials that failed any law, ascending and deduplicated.
    pub fn failing_trials(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .laws
            .iter()
            .flat_map(|l| l.failing_trials.iter().copied())
            .collect();
        t.sort_unstable();
        t.dedup();
        t
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Defect(f64),
    Infinite,
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone)]
struct Entry {
    law: usize,
    kind: Kind,
}

#[derive(Default)]
struct Trial {
    entries: Vec<Entry>,
    /// Every RE value seen, for the nonnegativity law.
    re_values: Vec<f64>,
}

impl Trial {
    fn defect(&mut self, law: usize, d: f64) {
        self.entries.push(Entry {
            law,
            kind: Kind::Defect(d),
        });
    }

    fn flag(&mut self, law: usize, ok: bool) {
        self.defect(law, if ok { 0.0 } else { 1.0 });
    }

    fn infinite(&mut self, law: usize) {
        self.entries.push(Entry {
            law,
            kind: Kind::Infinite,
        });
    }

    fn skip(&mut self, law: usize) {
        self.entries.push(Entry {
            law,
            kind: Kind::Skipped,
        });
    }

    fn fail(&mut self, law: usize, msg: impl Into<String>) {
        self.entries.push(Entry {
            law,
            kind: Kind::Failed(msg.into()),
        });
    }

    /// Records `r` under `law`, turning errors into failures.
    fn record<T>(&mut self, law: usize, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(law, e.to_string());
                None
            }
        }
    }

    fn re(&mut self, law: usize, m: &NcMorphism, cutoff: f64) -> Option<ExtendedReal> {
        let v = self.record(law, re_unchecked(m, cutoff))?;
        if let ExtendedReal::Finite(x) = v {
            self.re_values.push(x);
        }
        Some(v)
    }
}

fn random_element<R: Rng + ?Sized>(spec: &AlgebraSpec, rng: &mut R) -> AlgebraElement {
    let blocks = spec
        .blocks()
        .iter()
        .map(|&m| gaussian_matrix(rng, m, m))
        .collect();
    AlgebraElement::new(spec.clone(), blocks).expect("shapes from spec")
}

fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

fn re_difference(a: ExtendedReal, b: ExtendedReal) -> Option<f64> {
    match (a, b) {
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => Some((x - y).abs()),
        (ExtendedReal::Infinite, ExtendedReal::Infinite) => Some(0.0),
        _ => None,
    }
}

/// Distance between two families over the rows pinned down by the source state.
fn constrained_distance(a: &AlphaFamily, b: &AlphaFamily) -> f64 {
    a.grid()
        .iter()
        .zip(b.grid())
        .enumerate()
        .filter(|(y, _)| !b.unconstrained()[*y])
        .flat_map(|(_, (ra, rb))| ra.iter().zip(rb))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn classical_kl(p: &[f64], q: &[f64]) -> Option<f64> {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return None;
        }
        total += pi * (pi / qi).ln();
    }
    Some(total)
}

fn hom_residual(f: &StarHom, g: &StarHom, b: &AlgebraElement) -> Result<f64> {
    Ok(f.apply(b)?.distance(&g.apply(b)?))
}

fn run_trial(cfg: &GeneratorConfig, trial: usize) -> Trial {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let rng = &mut rng;
    let tol = cfg.tolerances;
    let faithful = cfg.faithful_only;
    let mut t = Trial::default();

    let pair = gen_composable_pair(cfg, rng);
    let (g, f) = (&pair.g, &pair.f);

    // Generator soundness and closure.
    t.flag(SOUNDNESS, g.validate(tol.atol).is_valid() && f.validate(tol.atol).is_valid());
    let composite = t.record(CLOSURE, compose_morphisms(g, f));
    if let Some(c) = &composite {
        t.flag(CLOSURE, c.validate(tol.atol).is_valid());
    }

    // Functoriality.
    match t.record(FUNCTORIALITY, functoriality_defect(g, f, tol.cutoff)) {
        Some(Functoriality::Finite {
            composite,
            g: re_g,
            f: re_f,
            defect,
        }) => {
            t.re_values.extend([composite, re_g, re_f]);
            t.defect(FUNCTORIALITY, defect);
        }
        Some(Functoriality::Infinite { .. }) if faithful => {
            t.fail(FUNCTORIALITY, "infinite relative entropy on faithful data")
        }
        Some(Functoriality::Infinite { .. }) => t.infinite(FUNCTORIALITY),
        None => {}
    }

    // Expansions and the product form of ζ∘R∘Q.
    if faithful {
        if let Some(e) = t.record(EXPANSION_FIRST, expansion_identities(g, f, tol)) {
            t.defect(EXPANSION_FIRST, e.first.defect());
            t.defect(EXPANSION_MIDDLE, e.middle.defect());
            t.defect(EXPANSION_COMPOSITE, e.composite.defect());
            t.defect(PRODUCT_FORM, e.product_residual);
        }
    } else {
        for law in [EXPANSION_FIRST, EXPANSION_MIDDLE, EXPANSION_COMPOSITE, PRODUCT_FORM] {
            t.skip(law);
        }
    }

    // Pushforward against the definition ξ(B) = ω(F(B)).
    for m in [g, f] {
        let b = random_element(m.hom().source(), rng);
        let omega = m.target().state();
        let r = m.hom().pushforward(omega).and_then(|xi| {
            let direct = omega.evaluate(&m.hom().apply(&b)?)?;
            Ok((xi.evaluate(&b)? - direct).norm())
        });
        if let Some(d) = t.record(PUSHFORWARD, r) {
            t.defect(PUSHFORWARD, d);
        }
    }

    // Vanishing on optimal morphisms, and rectification.
    let alphas = random_alphas(f.hom(), faithful, rng);
    let optimal = t.record(
        VANISHING,
        build_hypothesis_from_alphas(f.hom(), f.source().state(), &alphas, tol.atol),
    );
    if let Some(opt) = &optimal {
        t.flag(SOUNDNESS, opt.validate(tol.atol).is_valid());
        let (is_opt, _) = opt.is_optimal(tol.atol);
        if !is_opt {
            t.fail(VANISHING, "built hypothesis is not optimal");
        }
        match t.re(VANISHING, opt, tol.cutoff) {
            Some(ExtendedReal::Finite(v)) => t.defect(VANISHING, v.max(0.0)),
            Some(ExtendedReal::Infinite) => t.fail(VANISHING, "infinite RE on an optimal morphism"),
            None => {}
        }
    }
    let mut to_rectify = vec![g, f];
    to_rectify.extend(optimal.as_ref());
    for m in to_rectify {
        let rect = rectify_morphism(m).morphism;
        let valid_before = m.validate(tol.atol).is_valid();
        let valid_after = rect.validate(tol.atol).is_valid();
        let opt_before = m.is_optimal(tol.atol).0;
        let opt_after = rect.is_optimal(tol.atol).0;
        t.flag(RECTIFY_VALIDITY, valid_before == valid_after && opt_before == opt_after);
        let before = t.re(STANDARD_FORM, m, tol.cutoff);
        let after = t.re(STANDARD_FORM, &rect, tol.cutoff);
        if let (Some(a), Some(b)) = (before, after) {
            match re_difference(a, b) {
                Some(d) => t.defect(STANDARD_FORM, d),
                None => t.fail(STANDARD_FORM, format!("RE {a} before rectification, {b} after")),
            }
        }
    }

    // Affinity of convex sums.
    let re_f = t.re(AFFINITY, f, tol.cutoff);
    let re_g = t.re(AFFINITY, g, tol.cutoff);
    match (re_f, re_g) {
        (Some(ExtendedReal::Finite(a)), Some(ExtendedReal::Finite(b))) => {
            for lambda in AFFINITY_WEIGHTS {
                let Some(sum) = t.record(AFFINITY, convex_sum_morphisms(lambda, f, g)) else {
                    continue;
                };
                match t.re(AFFINITY, &sum, tol.cutoff) {
                    Some(ExtendedReal::Finite(v)) => {
                        t.defect(AFFINITY, (v - lambda * a - (1.0 - lambda) * b).abs())
                    }
                    Some(ExtendedReal::Infinite) => {
                        t.fail(AFFINITY, format!("convex sum infinite at λ = {lambda}"))
                    }
                    None => {}
                }
            }
        }
        (Some(_), Some(_)) => t.skip(AFFINITY),
        _ => {}
    }

    // Chain rule on C^2 ⊗ C^2 ⊗ C^2. The conditional entropies need a
    // faithful ρ_ABC, so this draw ignores `faithful_only`.
    let faithful_cfg = GeneratorConfig {
        faithful_only: true,
        ..*cfg
    };
    let rho = gen_state(&faithful_cfg, &AlgebraSpec::full(8).expect("nonzero"), rng);
    if let Some(cr) = t.record(CHAIN_RULE, chain_rule(&rho, [2, 2, 2], tol)) {
        t.re_values.extend([cr.re_composite, cr.re_g, cr.re_f]);
        let [a, b, c] = cr.identity_defects();
        t.defect(CHAIN_RULE, cr.chain_rule_defect().max(a).max(b).max(c));
    }

    // Classical reduction against a scalar oracle.
    let n = rng.random_range(1..=cfg.max_blocks.max(2) * cfg.max_block_dim);
    let p = random_distribution(n, faithful, rng);
    let q = random_distribution(n, faithful, rng);
    let states = State::classical(&p).and_then(|sp| Ok((sp, State::classical(&q)?)));
    if let Some((sp, sq)) = t.record(CLASSICAL_KL, states) {
        match (t.record(CLASSICAL_KL, relative_entropy(&sp, &sq, tol.cutoff)), classical_kl(&p, &q)) {
            (Some(ExtendedReal::Finite(v)), Some(oracle)) => {
                t.re_values.push(v);
                t.defect(CLASSICAL_KL, (v - oracle).abs());
            }
            (Some(ExtendedReal::Infinite), None) => t.infinite(CLASSICAL_KL),
            (Some(v), oracle) => t.fail(CLASSICAL_KL, format!("got {v}, oracle {oracle:?}")),
            (None, _) => {}
        }
    }

    // Disintegration round trip in standard form with faithful α.
    let f_std = f.hom().standardized();
    let alphas = random_alphas(&f_std, true, rng);
    let rt = build_hypothesis_from_alphas(&f_std, f.source().state(), &alphas, tol.atol)
        .and_then(|m| extract_alphas(&m, tol.atol));
    if let Some(back) = t.record(ROUNDTRIP, rt) {
        t.defect(ROUNDTRIP, constrained_distance(&alphas, &back));
    }

    // *-homomorphism laws: multiplicative, *-preserving, unital, composition.
    let hom = f.hom();
    let src = hom.source();
    let (b1, b2) = (random_element(src, rng), random_element(src, rng));
    let laws = (|| -> Result<f64> {
        let mult = hom.apply(&b1.mul(&b2)?)?.distance(&hom.apply(&b1)?.mul(&hom.apply(&b2)?)?);
        let star = hom.apply(&b1.adjoint())?.distance(&hom.apply(&b1)?.adjoint());
        let unit = hom
            .apply(&AlgebraElement::identity(src))?
            .distance(&AlgebraElement::identity(hom.target()));
        let c_spec = g.hom().source();
        let h_conj = c_spec.blocks().iter().map(|&m| haar_unitary(rng, m)).collect();
        let h = StarHom::new(
            c_spec.clone(),
            c_spec.clone(),
            StarHom::identity(c_spec).multiplicities().to_vec(),
            h_conj,
            1e-10,
        )?;
        let c = random_element(c_spec, rng);
        let left = hom.compose(g.hom())?.compose(&h)?;
        let right = hom.compose(&g.hom().compose(&h)?)?;
        let assoc = hom_residual(&left, &right, &c)?;
        let neutral = hom_residual(&hom.compose(&StarHom::identity(src))?, hom, &b1)?;
        Ok(mult.max(star).max(unit).max(assoc).max(neutral))
    })();
    if let Some(d) = t.record(HOM_LAWS, laws) {
        t.defect(HOM_LAWS, d);
    }
    if let Some(comp) = t.record(HOM_LAWS, hom.compose(g.hom())) {
        let cg = g.hom().multiplicities();
        let cf = hom.multiplicities();
        let exact = comp.multiplicities().iter().enumerate().all(|(z, row)| {
            row.iter().enumerate().all(|(x, &v)| {
                v == (0..cf.len()).map(|y| cg[z][y] * cf[y][x]).sum::<usize>()
            })
        });
        t.defect(HOM_LAWS, if exact { 0.0 } else { f64::INFINITY });
    }

    // Raw linear map round trip on matrix units.
    let raw = StarHom::from_raw(&hom.to_raw(), tol.atol).and_then(|back| {
        AlgebraElement::matrix_units(src)
            .iter()
            .map(|e| Ok(back.apply(e)?.distance(&hom.apply(e)?)))
            .try_fold(0.0_f64, |acc, r: Result<f64>| Ok(acc.max(r?)))
    });
    if let Some(d) = t.record(RAW_ROUNDTRIP, raw) {
        t.defect(RAW_ROUNDTRIP, d);
    }

    // CPU maps: positivity on PSD inputs and unitality.
    for m in [g, f] {
        let q = m.hypothesis();
        let blocks = q
            .source()
            .blocks()
            .iter()
            .map(|&k| {
                let g = gaussian_matrix(rng, k, k);
                &g * g.adjoint()
            })
            .collect();
        let r = AlgebraElement::new(q.source().clone(), blocks).and_then(|a| {
            let out = q.apply(&a)?;
            let mut neg: f64 = 0.0;
            for b in out.blocks() {
                neg = neg.max(-hermitian_eigen(&crate::algebra::hermitian_part(b))?.min_eigenvalue());
            }
            let unit = q
                .apply(&AlgebraElement::identity(q.source()))?
                .distance(&AlgebraElement::identity(q.target()));
            Ok(neg.max(unit))
        });
        if let Some(d) = t.record(CPU_POSITIVITY, r) {
            t.defect(CPU_POSITIVITY, d);
        }
    }

    // Linear algebra primitives.
    let (a, b) = (rng.random_range(1..=3), rng.random_range(1..=3));
    let m = gaussian_matrix(rng, a * b, a * b);
    let tr = m.trace();
    let pt = partial_trace_left(&m, a, b)
        .and_then(|l| Ok((l.trace() - tr).norm().max((partial_trace_right(&m, a, b)?.trace() - tr).norm())));
    if let Some(d) = t.record(PARTIAL_TRACE, pt) {
        t.defect(PARTIAL_TRACE, d / tr.norm().max(1.0));
    }

    let h = random_hermitian(rng, a * b);
    let le = hermitian_exp(&h).and_then(|e| hermitian_log(&e, 0.0));
    if let Some(l) = t.record(LOG_EXP, le) {
        t.defect(LOG_EXP, (l - &h).norm() / h.norm().max(1.0));
    }

    let rank = rng.random_range(0..=a * b);
    let gm = gaussian_matrix(rng, a * b, rank);
    let psd = &gm * gm.adjoint();
    if let Some(p) = t.record(SUPPORT_PROJECTION, support_projection(&psd, tol.cutoff)) {
        let idem = (&p * &p - &p).norm();
        let herm = (&p - p.adjoint()).norm();
        let fix = (&p * &psd * &p - &psd).norm() / psd.norm().max(1e-300);
        t.defect(SUPPORT_PROJECTION, idem.max(herm).max(fix));
    }

    let spec = random_spec(cfg, rng);
    let s: Vec<State> = (0..3).map(|_| gen_state(cfg, &spec, rng)).collect();
    let ac = |x: &State, y: &State| absolutely_continuous(x, y, tol.cutoff);
    let r = (|| -> Result<bool> {
        let reflexive = ac(&s[0], &s[0])? && ac(&s[1], &s[1])? && ac(&s[2], &s[2])?;
        let transitive = !(ac(&s[0], &s[1])? && ac(&s[1], &s[2])?) || ac(&s[0], &s[2])?;
        Ok(reflexive && transitive)
    })();
    if let Some(ok) = t.record(ABSOLUTE_CONTINUITY, r) {
        t.flag(ABSOLUTE_CONTINUITY, ok);
    }

    // Nonnegativity over every RE seen in this trial.
    let values = std::mem::take(&mut t.re_values);
    for v in values {
        t.defect(NONNEGATIVITY, (-v).max(0.0));
    }
    t
}

fn aggregate(cfg: &GeneratorConfig, trials: Vec<Trial>) -> LawReport {
    let mut laws: Vec<LawOutcome> = LAWS
        .iter()
        .map(|&(name, tolerance)| LawOutcome {
            name: name.to_string(),
            tolerance,
            checked: 0,
            passed: 0,
            max_defect: 0.0,
            failing_trials: Vec::new(),
            infinite: 0,
            skipped: 0,
            first_error: None,
        })
        .collect();
    let mut total_infinite = 0;
    for (index, trial) in trials.into_iter().enumerate() {
        for Entry { law, kind } in trial.entries {
            let out = &mut laws[law];
            let failed = match kind {
                Kind::Defect(d) => {
                    out.checked += 1;
                    out.max_defect = out.max_defect.max(d);
                    let ok = out.tolerance.accepts(d);
                    if ok {
                        out.passed += 1;
                    } else if d.is_nan() {
                        out.max_defect = f64::NAN;
                    }
                    !ok
                }
                Kind::Infinite => {
                    out.infinite += 1;
                    total_infinite += 1;
                    false
                }
                Kind::Skipped => {
                    out.skipped += 1;
                    false
                }
                Kind::Failed(msg) => {
                    out.checked += 1;
                    out.first_error.get_or_insert(format!("trial {index}: {msg}"));
                    true
                }
            };
            if failed && out.failing_trials.last() != Some(&index) {
                out.failing_trials.push(index);
            }
        }
    }
    let coverage = &mut laws[INFINITE_COVERAGE];
    coverage.checked = 1;
    coverage.infinite = total_infinite;
    if cfg.faithful_only || total_infinite > 0 {
        coverage.passed = 1;
    } else {
        coverage.max_defect = 1.0;
        coverage.first_error = Some("no instance reached the infinite branch".into());
    }
    LawReport { config: *cfg, laws }
}

/// Runs every law over `cfg.trials` trials, one after another.
pub fn run_laws_sequential(cfg: &GeneratorConfig) -> Result<LawReport> {
    cfg.validate()?;
    let trials = (0..cfg.trials).map(|i| run_trial(cfg, i)).collect();
    Ok(aggregate(cfg, trials))
}

/// Runs every law over `cfg.trials` trials on the rayon pool.
#[cfg(feature = "rayon")]
pub fn run_laws_parallel(cfg: &GeneratorConfig) -> Result<LawReport> {
    use rayon::prelude::*;
    cfg.validate()?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect();
    Ok(aggregate(cfg, trials))
}

/// Runs every law, in parallel when the `rayon` feature is enabled.
pub fn run_laws(cfg: &GeneratorConfig) -> Result<LawReport> {
    #[cfg(feature = "rayon")]
    {
        run_laws_parallel(cfg)
    }
    #[cfg(not(feature = "rayon"))]
    {
        run_laws_sequential(cfg)
    }
}
