use ncstat_core::harness::{gen_composable_pair, run_laws, run_laws_sequential, trial_rng, GeneratorConfig};

fn small(faithful_only: bool) -> GeneratorConfig {
    GeneratorConfig {
        seed: 7,
        trials: 40,
        faithful_only,
        ..Default::default()
    }
}

#[test]
fn same_seed_same_report() {
    let cfg = small(true);
    assert_eq!(run_laws(&cfg).unwrap(), run_laws(&cfg).unwrap());
}

#[cfg(feature = "rayon")]
#[test]
fn parallel_matches_sequential() {
    use ncstat_core::harness::run_laws_parallel;
    for faithful in [true, false] {
        let cfg = small(faithful);
        assert_eq!(run_laws_parallel(&cfg).unwrap(), run_laws_sequential(&cfg).unwrap());
    }
}

#[test]
fn default_config_passes() {
    let report = run_laws(&GeneratorConfig::default()).unwrap();
    assert!(report.ok(), "{report:#?}");
}

#[test]
fn mixed_mode_logs_infinite_cases_without_failing() {
    let report = run_laws_sequential(&small(false)).unwrap();
    assert!(report.ok(), "{report:#?}");
    assert!(report.law("infinite-coverage").unwrap().infinite > 0);
}

#[test]
fn invalid_configs_rejected() {
    for cfg in [
        GeneratorConfig { trials: 0, ..Default::default() },
        GeneratorConfig { max_blocks: 0, ..Default::default() },
        GeneratorConfig { max_block_dim: 0, ..Default::default() },
    ] {
        assert!(run_laws(&cfg).is_err());
    }
}

#[test]
fn pairs_are_reproducible() {
    let cfg = GeneratorConfig::default();
    let a = gen_composable_pair(&cfg, &mut trial_rng(3, 9));
    let b = gen_composable_pair(&cfg, &mut trial_rng(3, 9));
    assert_eq!(a.f.target().state(), b.f.target().state());
    assert_eq!(a.g.hom(), b.g.hom());
    assert_eq!(a.f.hypothesis(), b.f.hypothesis());
}

#[test]
fn larger_sizes_pass() {
    let cfg = GeneratorConfig {
        seed: 11,
        trials: 10,
        max_blocks: 2,
        max_block_dim: 5,
        ..Default::default()
    };
    let report = run_laws(&cfg).unwrap();
    assert!(report.ok(), "{report:#?}");
}
