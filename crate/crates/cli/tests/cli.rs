use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ncstat_core::algebra::{AlgebraSpec, CMat, State, C64};
use ncstat_core::harness::wire::{self, DisintegrationDto, HomDto, MorphismDto, RectifyDto, StateDto};
use ncstat_core::harness::{gen_composable_pair, trial_rng, GeneratorConfig};
use ncstat_core::StarHom;
use tempfile::TempDir;

fn ncstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncstat"))
        .args(args)
        .env_remove("NCSTAT_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn put<T: serde::Serialize>(dir: &TempDir, name: &str, v: &T) -> PathBuf {
    let path = dir.path().join(name);
    wire::write(&path, v).unwrap();
    path
}

fn classical(dir: &TempDir, name: &str, p: &[f64]) -> PathBuf {
    put(dir, name, &StateDto::encode(&State::classical(p).unwrap()))
}

fn pure_qubit(dir: &TempDir, name: &str) -> PathBuf {
    let mut d = CMat::zeros(2, 2);
    d[(0, 0)] = C64::new(1.0, 0.0);
    let s = State::new(AlgebraSpec::full(2).unwrap(), vec![d]).unwrap();
    put(dir, name, &StateDto::encode(&s))
}

#[test]
fn rel_entropy_prints_nats() {
    let dir = TempDir::new().unwrap();
    let a = classical(&dir, "a.json", &[0.5, 0.5]);
    let b = classical(&dir, "b.json", &[0.75, 0.25]);
    let out = ncstat(&["rel-entropy", p(&a), p(&b)]);
    assert!(out.status.success());
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-12);
}

#[test]
fn rel_entropy_prints_inf() {
    let dir = TempDir::new().unwrap();
    let mixed = put(
        &dir,
        "mixed.json",
        &StateDto::encode(&State::maximally_mixed(&AlgebraSpec::full(2).unwrap())),
    );
    let pure = pure_qubit(&dir, "pure.json");
    let out = ncstat(&["rel-entropy", p(&mixed), p(&pure), "--cutoff", "1e-10"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "inf");
    let back = ncstat(&["rel-entropy", p(&pure), p(&mixed)]);
    let v: f64 = stdout(&back).trim().parse().unwrap();
    assert!((v - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = classical(&dir, "good.json", &[0.3, 0.7]);
    let out = ncstat(&["validate", p(&good)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("valid"));

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"algebra":{"blocks":[2]},"densities":[{"re":[[1.2,0],[0,-0.2]],"im":[[0,0],[0,0]]}]}"#,
    )
    .unwrap();
    let out = ncstat(&["validate", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("negative eigenvalue"));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{").unwrap();
    assert_eq!(ncstat(&["validate", p(&garbage)]).status.code(), Some(1));
}

#[test]
fn tolerance_env_and_flag() {
    let dir = TempDir::new().unwrap();
    let nearly = dir.path().join("nearly.json");
    // Total trace 1 + 1e-6.
    std::fs::write(
        &nearly,
        r#"{"algebra":{"blocks":[1,1]},"densities":[{"re":[[0.5]],"im":[[0]]},{"re":[[0.500001]],"im":[[0]]}]}"#,
    )
    .unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ncstat"));
        cmd.env_remove("NCSTAT_TOL");
        if let Some(v) = env {
            cmd.env("NCSTAT_TOL", v);
        }
        cmd.arg("validate").arg(&nearly);
        if let Some(v) = flag {
            cmd.args(["--tol", v]);
        }
        cmd.output().unwrap().status.success()
    };
    assert!(!run(None, None));
    assert!(run(Some("1e-5"), None));
    assert!(!run(Some("1e-5"), Some("1e-9")));
    assert!(run(None, Some("1e-5")));
}

#[test]
fn re_rectify_compose_roundtrip() {
    let dir = TempDir::new().unwrap();
    let pair = gen_composable_pair(&GeneratorConfig::default(), &mut trial_rng(5, 0));
    let g = put(&dir, "g.json", &MorphismDto::encode(&pair.g));
    let f = put(&dir, "f.json", &MorphismDto::encode(&pair.f));

    assert!(ncstat(&["validate", p(&f)]).status.success());
    let re_f: f64 = stdout(&ncstat(&["re", p(&f)])).trim().parse().unwrap();
    let re_g: f64 = stdout(&ncstat(&["re", p(&g)])).trim().parse().unwrap();
    assert!(re_f >= -1e-10 && re_g >= -1e-10);

    let rect = dir.path().join("rect.json");
    assert!(ncstat(&["rectify", p(&f), "-o", p(&rect)]).status.success());
    let r: RectifyDto = wire::read(&rect).unwrap();
    assert_eq!(r.u.len(), pair.f.hom().target().block_count());
    let rect_m = dir.path().join("rect_m.json");
    wire::write(&rect_m, &r.morphism).unwrap();
    let re_rect: f64 = stdout(&ncstat(&["re", p(&rect_m)])).trim().parse().unwrap();
    assert!((re_rect - re_f).abs() < 1e-9);

    let comp = dir.path().join("comp.json");
    assert!(ncstat(&["compose", p(&g), p(&f), "-o", p(&comp)]).status.success());
    assert!(ncstat(&["validate", p(&comp)]).status.success());
    let re_c: f64 = stdout(&ncstat(&["re", p(&comp)])).trim().parse().unwrap();
    assert!((re_c - re_g - re_f).abs() < 1e-8);

    // Swapped order does not compose.
    assert!(!ncstat(&["compose", p(&f), p(&g), "-o", p(&comp)]).status.success());
}

#[test]
fn disintegrate_reports_both_outcomes() {
    let dir = TempDir::new().unwrap();
    let f = StarHom::standard(
        AlgebraSpec::commutative(2).unwrap(),
        AlgebraSpec::full(2).unwrap(),
        vec![vec![1], vec![1]],
    )
    .unwrap();
    let hom = put(&dir, "hom.json", &HomDto::encode(&f));
    let out = dir.path().join("out.json");

    let diag = put(
        &dir,
        "diag.json",
        &StateDto::encode(&State::maximally_mixed(&AlgebraSpec::full(2).unwrap())),
    );
    let o = ncstat(&["disintegrate", p(&hom), p(&diag), "-o", p(&out)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "optimal");
    let d: DisintegrationDto = wire::read(&out).unwrap();
    assert!(matches!(d, DisintegrationDto::Optimal { .. }));

    let plus = dir.path().join("plus.json");
    std::fs::write(
        &plus,
        r#"{"algebra":{"blocks":[2]},"densities":[{"re":[[0.5,0.5],[0.5,0.5]],"im":[[0,0],[0,0]]}]}"#,
    )
    .unwrap();
    let o = ncstat(&["disintegrate", p(&hom), p(&plus), "-o", p(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("no disintegration"));
    let d: DisintegrationDto = wire::read(&out).unwrap();
    assert!(matches!(d, DisintegrationDto::NoDisintegration { .. }));
}

#[test]
fn chain_rule_on_ghz() {
    let dir = TempDir::new().unwrap();
    let mut d = CMat::zeros(8, 8);
    for (i, j) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
        d[(i, j)] = C64::new(0.5, 0.0);
    }
    let s = State::new(AlgebraSpec::full(8).unwrap(), vec![d]).unwrap();
    let rho = put(&dir, "ghz.json", &StateDto::encode(&s));
    let o = ncstat(&["chain-rule", p(&rho), "--dims", "2,2,2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let total: f64 = text
        .lines()
        .find(|l| l.starts_with("RE(total)"))
        .and_then(|l| l.split_whitespace().nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!((total - 3.0 * 2f64.ln()).abs() < 1e-9);
    assert!(text.contains("H(A|BC)"));
    assert!(!ncstat(&["chain-rule", p(&rho), "--dims", "2,2"]).status.success());
}

#[test]
fn check_passes_and_rejects_zero_trials() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let o = ncstat(&[
        "check", "--seed", "3", "--trials", "20", "--faithful-only", "--max-blocks", "2",
        "--max-dim", "3", "--report", p(&report),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("functoriality"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["laws"].as_array().unwrap().len() > 10);

    let o = ncstat(&["check", "--seed", "3", "--trials", "30"]);
    assert!(o.status.success(), "{}", stdout(&o));

    assert_eq!(ncstat(&["check", "--trials", "0"]).status.code(), Some(1));
}
