use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ncstat_core::entropy::{chain_rule, re_functor, relative_entropy};
use ncstat_core::harness::wire::{
    self, DisintegrationDto, Document, HomDto, MorphismDto, RectifyDto, StateDto,
};
use ncstat_core::harness::{run_laws, GeneratorConfig};
use ncstat_core::hypotheses::{
    compose_morphisms, construct_optimal_hypothesis, rectify_morphism, Disintegration,
};
use ncstat_core::{Tolerances, DEFAULT_ATOL, DEFAULT_CUTOFF};

#[derive(Parser)]
#[command(name = "ncstat", version, about = "Relative entropy of non-commutative hypotheses")]
struct Cli {
    /// Numerical tolerance for validation and factorization checks.
    #[arg(long, global = true, env = "NCSTAT_TOL", default_value_t = DEFAULT_ATOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a state, hom, CPU map or morphism; exit 1 if invalid.
    Validate { file: PathBuf },
    /// Relative entropy S(a ‖ b) in nats, or "inf".
    RelEntropy {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
    },
    /// RE of a morphism, S(ω ‖ ξ∘Q).
    Re {
        morphism: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
    },
    /// Move a morphism to standard form; writes U and the rectified morphism.
    Rectify {
        morphism: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compose g: C → B with f: B → A.
    Compose {
        g: PathBuf,
        f: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build the optimal hypothesis for a hom and a target state.
    Disintegrate {
        hom: PathBuf,
        state: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Conditional entropies and RE identities of a tripartite state.
    ChainRule {
        rho: PathBuf,
        /// Factor dimensions dA,dB,dC.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
    },
    /// Run the property laws on random instances; exit 1 on any failure.
    Check {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Generate only faithful states and hypotheses.
        #[arg(long)]
        faithful_only: bool,
        #[arg(long, default_value_t = 3)]
        max_blocks: usize,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        /// Also write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn read<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    wire::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_state(path: &PathBuf) -> Result<ncstat_core::State> {
    Ok(read::<StateDto>(path)?.decode()?)
}

fn read_morphism(path: &PathBuf) -> Result<ncstat_core::NcMorphism> {
    Ok(read::<MorphismDto>(path)?.decode()?)
}

fn print_report(report: &ncstat_core::ValidationReport) {
    if report.is_valid() {
        println!("valid");
    }
    for v in &report.violations {
        println!("violation: {v}");
    }
    if let Some(f) = report.faithful {
        println!("faithful: {f}");
    }
}

fn validate(path: &PathBuf, atol: f64) -> Result<bool> {
    Ok(match read::<Document>(path)? {
        Document::State(s) => {
            let r = s.decode()?.validate(atol);
            println!("kind: state");
            print_report(&r);
            r.is_valid()
        }
        Document::Morphism(m) => {
            let m = m.decode()?;
            let r = m.validate(atol);
            println!("kind: morphism");
            println!("left-inverse residual: {:e}", m.left_inverse_residual());
            println!("optimality residual: {:e}", m.optimality_residual());
            print_report(&r);
            r.is_valid()
        }
        Document::Hom(h) => {
            println!("kind: hom");
            match h.decode() {
                Ok(f) => {
                    println!("standard-form residual: {:e}", f.standard_form_residual());
                    println!("valid");
                    true
                }
                Err(e) => {
                    println!("violation: {e}");
                    false
                }
            }
        }
        Document::Cpu(q) => {
            let r = q.decode()?.validate(atol);
            println!("kind: cpu map");
            print_report(&r);
            r.is_valid()
        }
    })
}

fn check(cfg: GeneratorConfig, report_path: Option<&PathBuf>) -> Result<bool> {
    let report = run_laws(&cfg)?;
    println!(
        "seed {} trials {} faithful_only {} max_blocks {} max_dim {}",
        cfg.seed, cfg.trials, cfg.faithful_only, cfg.max_blocks, cfg.max_block_dim
    );
    println!(
        "{:<28} {:>8} {:>8} {:>12} {:>9} {:>8}  status",
        "law", "checked", "passed", "max defect", "infinite", "skipped"
    );
    for law in &report.laws {
        println!(
            "{:<28} {:>8} {:>8} {:>12.3e} {:>9} {:>8}  {}",
            law.name,
            law.checked,
            law.passed,
            law.max_defect,
            law.infinite,
            law.skipped,
            if law.ok() { "ok" } else { "FAIL" }
        );
        if let Some(e) = &law.first_error {
            println!("    {e}");
        }
    }
    let failing = report.failing_trials();
    if !failing.is_empty() {
        println!("failing trials (seed {}): {:?}", cfg.seed, failing);
    }
    if let Some(p) = report_path {
        wire::write(p, &report)?;
    }
    Ok(report.ok())
}

fn run(cli: Cli) -> Result<bool> {
    let atol = cli.tol;
    if !(atol.is_finite() && atol > 0.0) {
        bail!("tolerance must be positive, got {atol}");
    }
    match cli.command {
        Command::Validate { file } => validate(&file, atol),
        Command::RelEntropy { a, b, cutoff } => {
            let (a, b) = (read_state(&a)?, read_state(&b)?);
            for (name, s) in [("first", &a), ("second", &b)] {
                let r = s.validate(atol);
                if !r.is_valid() {
                    bail!("{name} state is invalid: {r}");
                }
            }
            println!("{}", relative_entropy(&a, &b, cutoff)?);
            Ok(true)
        }
        Command::Re { morphism, cutoff } => {
            let m = read_morphism(&morphism)?;
            println!("{}", re_functor(&m, Tolerances { atol, cutoff })?);
            Ok(true)
        }
        Command::Rectify { morphism, output } => {
            let r = rectify_morphism(&read_morphism(&morphism)?);
            wire::write(&output, &RectifyDto::encode(&r))?;
            Ok(true)
        }
        Command::Compose { g, f, output } => {
            let m = compose_morphisms(&read_morphism(&g)?, &read_morphism(&f)?)?;
            wire::write(&output, &MorphismDto::encode(&m))?;
            Ok(true)
        }
        Command::Disintegrate { hom, state, output } => {
            let f = read::<HomDto>(&hom)?.decode()?;
            let d = construct_optimal_hypothesis(&f, &read_state(&state)?, atol)?;
            match &d {
                Disintegration::Optimal { .. } => println!("optimal"),
                Disintegration::NoDisintegration(o) => println!("no disintegration: {o}"),
            }
            wire::write(&output, &DisintegrationDto::encode(&d))?;
            Ok(true)
        }
        Command::ChainRule { rho, dims, cutoff } => {
            let Ok(dims) = <[usize; 3]>::try_from(dims) else {
                bail!("--dims takes exactly three values dA,dB,dC");
            };
            let cr = chain_rule(&read_state(&rho)?, dims, Tolerances { atol, cutoff })?;
            let [d_total, d_g, d_f] = cr.identity_defects();
            println!("H(AB|C) = {}", cr.h_ab_given_c);
            println!("H(A|BC) = {}", cr.h_a_given_bc);
            println!("H(B|C) = {}", cr.h_b_given_c);
            println!(
                "H(AB|C) = {}  vs  H(A|BC) + H(B|C) = {}  (defect {:e})",
                cr.h_ab_given_c,
                cr.h_a_given_bc + cr.h_b_given_c,
                cr.chain_rule_defect()
            );
            println!(
                "RE(total) = {}  vs  H(AB|C) + ln dA + ln dB = {}  (defect {d_total:e})",
                cr.re_composite,
                cr.h_ab_given_c + cr.ln_da + cr.ln_db
            );
            println!(
                "RE(G,R) = {}  vs  H(B|C) + ln dB = {}  (defect {d_g:e})",
                cr.re_g,
                cr.h_b_given_c + cr.ln_db
            );
            println!(
                "RE(F,Q) = {}  vs  H(A|BC) + ln dA = {}  (defect {d_f:e})",
                cr.re_f,
                cr.h_a_given_bc + cr.ln_da
            );
            Ok(true)
        }
        Command::Check {
            seed,
            trials,
            faithful_only,
            max_blocks,
            max_dim,
            report,
        } => {
            let cfg = GeneratorConfig {
                seed,
                trials,
                faithful_only,
                max_blocks,
                max_block_dim: max_dim,
                tolerances: Tolerances {
                    atol,
                    cutoff: DEFAULT_CUTOFF,
                },
            };
            check(cfg, report.as_ref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
