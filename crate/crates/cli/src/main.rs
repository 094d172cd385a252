//! `quasiherm`: metric-operator analysis of matrix Hamiltonians.
//!
//! Exit codes: 0 when every residual passes, 1 on input or spectral
//! errors, 2 when some identity residual exceeds the tolerance.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quasiherm::models::ModelSpec;
use quasiherm::report::{self, AnalyzeOptions, InputSource, Mode, DEFAULT_MAX_DIM};
use quasiherm::symmetry::DEFAULT_SPREAD;
use quasiherm::tolerances::TOLERANCES_ENV;
use quasiherm::Tolerances;

#[derive(Parser, Debug)]
#[command(
    name = "quasiherm",
    version,
    about = "Metric operators for quasi-Hermitian matrix Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the metric, the Hermitian equivalent and a sampled metric family.
    Analyze(CommonArgs),
    /// Sample the symmetry-generated metric family only.
    Family(CommonArgs),
    /// Spectral diagnostics only.
    Spectrum(CommonArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    #[value(name = "two_level")]
    TwoLevel,
    Swanson,
    Random,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Matrix file `{"dim": n, "entries": [[re, im], ...]}` (row-major).
    input: Option<PathBuf>,

    /// Use a built-in model instead of an input file.
    #[arg(long, value_enum, conflicts_with = "input")]
    model: Option<ModelKind>,

    /// Model parameter `key=value`; complex values as `re:im`.
    /// two_level: b, c, d. swanson: omega, alpha, beta. random: seed, cond_bound.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Matrix size for the swanson and random models.
    #[arg(long)]
    dim: Option<usize>,

    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,

    /// Number of sampled symmetry generators.
    #[arg(long, default_value_t = 5)]
    samples: usize,

    /// Seed of the first sampled generator; member `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Generator weights are drawn log-uniformly from `[1/spread, spread]`.
    #[arg(long, default_value_t = DEFAULT_SPREAD)]
    spread: f64,

    /// Largest accepted matrix dimension.
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, [f64; 2]>, String> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected KEY=VALUE, got `{item}`"))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number `{s}` for `{key}`: {e}"))
        };
        let z = match value.split_once(':') {
            Some((re, im)) => [parse(re)?, parse(im)?],
            None => [parse(value)?, 0.0],
        };
        out.insert(key.trim().to_string(), z);
    }
    Ok(out)
}

fn model_spec(
    kind: ModelKind,
    params: &BTreeMap<String, [f64; 2]>,
    dim: Option<usize>,
) -> Result<ModelSpec, String> {
    let allowed: &[&str] = match kind {
        ModelKind::TwoLevel => &["b", "c", "d"],
        ModelKind::Swanson => &["omega", "alpha", "beta"],
        ModelKind::Random => &["seed", "cond_bound"],
    };
    if let Some(unknown) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(format!(
            "unknown parameter `{unknown}` for this model (expected one of {allowed:?})"
        ));
    }
    let real = |key: &str, default: f64| -> Result<f64, String> {
        match params.get(key) {
            None => Ok(default),
            Some([re, 0.0]) => Ok(*re),
            Some(_) => Err(format!("parameter `{key}` must be real")),
        }
    };
    let complex = |key: &str| params.get(key).copied().unwrap_or([1.0, 0.0]);
    Ok(match kind {
        ModelKind::TwoLevel => ModelSpec::TwoLevel {
            b: complex("b"),
            c: complex("c"),
            d: real("d", 0.0)?,
        },
        ModelKind::Swanson => ModelSpec::Swanson {
            dim: dim.unwrap_or(60),
            omega: real("omega", 1.0)?,
            alpha: real("alpha", 0.0)?,
            beta: real("beta", 0.0)?,
        },
        ModelKind::Random => {
            let seed = real("seed", 0.0)?;
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(format!(
                    "random model seed must be a non-negative integer, got {seed}"
                ));
            }
            ModelSpec::Random {
                dim: dim.unwrap_or(4),
                seed: seed as u64,
                cond_bound: real("cond_bound", 100.0)?,
            }
        }
    })
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances, String> {
    let base = Tolerances::from_env().map_err(|e| format!("{TOLERANCES_ENV}: {e}"))?;
    let t = match tol {
        Some(r) => base.with_residual_tol(r),
        None => base,
    };
    t.validate().map_err(|e| e.to_string())?;
    Ok(t)
}

fn execute(mode: Mode, args: CommonArgs) -> Result<i32, String> {
    let source = match (&args.input, args.model) {
        (Some(path), None) => InputSource::File(path.clone()),
        (None, Some(kind)) => {
            InputSource::Model(model_spec(kind, &parse_params(&args.params)?, args.dim)?)
        }
        (None, None) => return Err("either an input file or --model is required".into()),
        (Some(_), Some(_)) => unreachable!("clap rejects input together with --model"),
    };
    if args.model.is_none() && !args.params.is_empty() {
        return Err("--param requires --model".into());
    }
    let options = AnalyzeOptions {
        tolerances: tolerances(args.tol)?,
        samples: args.samples,
        seed: args.seed,
        spread: args.spread,
        max_dim: args.max_dim,
    };
    let report = report::run(mode, &source, &options);
    let json = report.to_json().map_err(|e| e.to_string())?;
    match &args.out {
        Some(path) => std::fs::write(path, json).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{json}"),
    }
    if let Some(err) = &report.error {
        eprintln!("quasiherm: {}", err.message);
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (mode, args) = match cli.command {
        Command::Analyze(a) => (Mode::Analyze, a),
        Command::Family(a) => (Mode::Family, a),
        Command::Spectrum(a) => (Mode::Spectrum, a),
    };
    match execute(mode, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("quasiherm: {msg}");
            ExitCode::from(1)
        }
    }
}
