//! `ncerg` — experiments with weighted and subsequential ergodic averages of
//! positive Dunford-Schwartz operators on finite direct sums of matrix
//! algebras.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::Deserialize;

use ncerg_core::convergence::{self, BuemProbeConfig};
use ncerg_core::ds::{self, AlgebraMap, DsOperator, ScalingHook};
use ncerg_core::experiment::{self, AlgebraConfig, OperatorConfig};
use ncerg_core::subsequence::{self, SubsequenceSpec};
use ncerg_core::{AlgebraSpec, Error};

#[derive(Parser)]
#[command(name = "ncerg", version, about = "Noncommutative ergodic averages at matrix scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (or a manifest) and write its bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `input.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check that a recipe defines a positive map contracting both norms.
    CheckDs {
        #[arg(long)]
        recipe: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a sequence prefix as CSV: n, k, density, sup_ratio, N_I.
    GenSeq {
        #[arg(long)]
        spec: PathBuf,
        #[arg(short = 'N', value_name = "N")]
        n: usize,
    },
    /// Run the b.u.e.m. probe of an experiment config.
    ProbeBuem {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep the transfer identities and the gap bound over random instances.
    CheckIdentities {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
}

/// How a command failed; maps onto the exit status.
enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
    /// The command ran, but the checked property does not hold.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidAlgebra(_)
            | Error::AlgebraMismatch
            | Error::BlockShape { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidRecipe(_)
            | Error::InvalidSequence(_)
            | Error::InvalidApparatus { .. }
            | Error::InvalidWeights(_)
            | Error::InvalidConfig(_)
            | Error::Json(_) => Failure::Validation(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NCERG_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed } => run(&config, &out, seed),
        Command::CheckDs {
            recipe,
            samples,
            tol,
            seed,
        } => check_ds(&recipe, samples, tol, seed),
        Command::GenSeq { spec, n } => gen_seq(&spec, n),
        Command::ProbeBuem { config } => probe_buem(&config),
        Command::CheckIdentities { seed, instances } => check_identities(seed, instances),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Validation(anyhow::anyhow!("reading {}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(value: &T) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Runtime(e.into()))?;
    writeln!(out).map_err(|e| Failure::Runtime(e.into()))
}

fn run(config: &Path, out: &Path, seed: Option<u64>) -> Outcome {
    let cfg = experiment::parse_config(&read(config)?)?;
    let bundle = experiment::run_experiment(&cfg, Some(out), seed).map_err(|e| match Failure::from(e) {
        Failure::Runtime(e) => Failure::Runtime(anyhow::anyhow!("experiment {} aborted: {e}", config.display())),
        other => other,
    })?;
    let r = &bundle.report;
    println!(
        "wrote {}: terminal residual {:e}, decision {:?}, probe {}/{}",
        bundle.directory.display(),
        r.terminal_residual,
        r.convergence.decision,
        r.probe.samples_passed,
        r.probe.samples_attempted
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecipeFile {
    algebra: AlgebraConfig,
    recipe: serde_json::Value,
    /// Seeds random recipes.
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum HookData {
    TestHookScaling { factor: f64 },
}

fn check_ds(path: &Path, samples: usize, tol: f64, seed: u64) -> Outcome {
    let file: RecipeFile = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    let alg = AlgebraSpec::new(file.algebra.blocks)?.shared();
    let map: Box<dyn AlgebraMap> = if file.recipe.get("kind").and_then(|k| k.as_str()) == Some("test_hook_scaling") {
        let HookData::TestHookScaling { factor } = serde_json::from_value(file.recipe).map_err(Error::from)?;
        Box::new(ScalingHook::new(&alg, factor))
    } else {
        match serde_json::from_value(file.recipe).map_err(Error::from)? {
            OperatorConfig::Recipe(r) => Box::new(DsOperator::from_data(&alg, &r)?),
            OperatorConfig::RandomMixedUnitary { terms } => Box::new(DsOperator::random_mixed_unitary(
                &alg,
                terms,
                &mut ncerg_core::random::rng(file.seed),
            )),
        }
    };
    let report = ds::verify_ds_plus(map.as_ref(), samples, tol, seed)?;
    print_json(&report)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Check("map is not in DS+ at the requested tolerance".into()))
    }
}

fn gen_seq(path: &Path, n: usize) -> Outcome {
    if n == 0 {
        return Err(Failure::Validation(anyhow::anyhow!("-N must be at least 1")));
    }
    let spec: SubsequenceSpec = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    spec.validate()?;
    let k = spec.prefix(n)?;
    let n_i = match &spec {
        SubsequenceSpec::Blocks(b) => Some(subsequence::block_sequence(b, n)?.interval_index),
        _ => None,
    };
    info!("materialized {n} terms of {}", spec.describe());
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let csv_err = |e: csv::Error| Failure::Runtime(e.into());
    w.write_record(["n", "k", "density", "sup_ratio", "N_I"]).map_err(csv_err)?;
    let mut sup: f64 = 0.0;
    for (i, &kn) in k.iter().enumerate() {
        // `card({0..k_n} ∩ k) / (k_n + 1)` and `max_{1≤m≤n} k_m / m`.
        let density = (i + 1) as f64 / (kn + 1) as f64;
        let ratio = if i == 0 {
            String::new()
        } else {
            sup = sup.max(kn as f64 / i as f64);
            sup.to_string()
        };
        let ni = n_i.as_ref().map_or(String::new(), |v| v[i].to_string());
        w.write_record([i.to_string(), kn.to_string(), density.to_string(), ratio, ni])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Failure::Runtime(e.into()))
}

fn probe_buem(path: &Path) -> Outcome {
    let cfg = experiment::parse_config(&read(path)?)?;
    let r = cfg.resolve()?;
    let probe = &cfg.probe;
    let result = convergence::buem_probe(
        &r.operator,
        &r.weights,
        Some(&r.sequence),
        &BuemProbeConfig {
            p: probe.p,
            epsilon: probe.epsilon,
            delta: probe.delta,
            horizon: cfg.probe_horizon(),
            samples: probe.samples,
            seed: cfg.input.seed,
            mode: probe.mode,
            check_scale: 1.0,
        },
    )?;
    print_json(&result)?;
    if result.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} of {} samples admitted a witness",
            result.samples_passed, result.samples_attempted
        )))
    }
}

fn check_identities(seed: u64, instances: usize) -> Outcome {
    if instances == 0 {
        return Err(Failure::Validation(anyhow::anyhow!("--instances must be at least 1")));
    }
    let sweep = experiment::sweep_identities(seed, instances)?;
    println!("max residual {:e}", sweep.max_scaled_residual);
    println!("max gap excess {:e}", sweep.max_gap_excess);
    print_json(&sweep)?;
    if sweep.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "residual {:e} or gap excess {:e} above {:e}",
            sweep.max_scaled_residual, sweep.max_gap_excess, sweep.tolerance
        )))
    }
}
